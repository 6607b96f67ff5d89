//! Contrast-limited adaptive histogram equalization on 8-bit data.
//!
//! Follows the classic tile-LUT formulation: the image is split into a
//! `tiles x tiles` grid, each tile gets a clipped-and-redistributed histogram
//! LUT, and output pixels bilinearly interpolate between the four nearest
//! tile LUTs. Images whose dimensions are not divisible by the grid are
//! extended with reflect-101 borders for LUT computation. All rounding is
//! half away from zero.

/// Applies CLAHE to a row-major 8-bit buffer.
pub(crate) fn clahe_u8(
    src: &[u8],
    width: usize,
    height: usize,
    clip_limit: f64,
    tiles: usize,
) -> Vec<u8> {
    assert!(tiles >= 1);
    assert_eq!(src.len(), width * height);

    let (ext, ext_w, ext_h) = if width.is_multiple_of(tiles) && height.is_multiple_of(tiles) {
        (src.to_vec(), width, height)
    } else {
        extend_reflect101(src, width, height, tiles)
    };
    let tile_w = ext_w / tiles;
    let tile_h = ext_h / tiles;
    let tile_area = tile_w * tile_h;

    // Per-tile LUTs.
    let mut luts = vec![[0u8; 256]; tiles * tiles];
    for ty in 0..tiles {
        for tx in 0..tiles {
            let mut hist = [0usize; 256];
            for y in ty * tile_h..(ty + 1) * tile_h {
                for x in tx * tile_w..(tx + 1) * tile_w {
                    hist[ext[y * ext_w + x] as usize] += 1;
                }
            }
            let clip = ((clip_limit * tile_area as f64 / 256.0).floor() as usize).max(1);
            let mut clipped = 0usize;
            for bin in hist.iter_mut() {
                if *bin > clip {
                    clipped += *bin - clip;
                    *bin = clip;
                }
            }
            let batch = clipped / 256;
            let mut residual = clipped % 256;
            for bin in hist.iter_mut() {
                *bin += batch;
            }
            if residual > 0 {
                let step = (256 / residual).max(1);
                let mut i = 0;
                while i < 256 && residual > 0 {
                    hist[i] += 1;
                    residual -= 1;
                    i += step;
                }
            }
            let lut = &mut luts[ty * tiles + tx];
            let scale = 255.0 / tile_area as f64;
            let mut cdf = 0usize;
            for (v, bin) in hist.iter().enumerate() {
                cdf += bin;
                lut[v] = (cdf as f64 * scale).round().clamp(0.0, 255.0) as u8;
            }
        }
    }

    // Bilinear interpolation between the four nearest tile LUTs, evaluated
    // on the original (unextended) pixels.
    let mut out = vec![0u8; width * height];
    for y in 0..height {
        let tyf = y as f64 / tile_h as f64 - 0.5;
        let ty_lo = tyf.floor() as isize;
        let ya = tyf - ty_lo as f64;
        let ty1 = ty_lo.clamp(0, tiles as isize - 1) as usize;
        let ty2 = (ty_lo + 1).clamp(0, tiles as isize - 1) as usize;
        for x in 0..width {
            let txf = x as f64 / tile_w as f64 - 0.5;
            let tx_lo = txf.floor() as isize;
            let xa = txf - tx_lo as f64;
            let tx1 = tx_lo.clamp(0, tiles as isize - 1) as usize;
            let tx2 = (tx_lo + 1).clamp(0, tiles as isize - 1) as usize;
            let v = src[y * width + x] as usize;
            let tl = luts[ty1 * tiles + tx1][v] as f64;
            let tr = luts[ty1 * tiles + tx2][v] as f64;
            let bl = luts[ty2 * tiles + tx1][v] as f64;
            let br = luts[ty2 * tiles + tx2][v] as f64;
            let top = tl * (1.0 - xa) + tr * xa;
            let bottom = bl * (1.0 - xa) + br * xa;
            let val = top * (1.0 - ya) + bottom * ya;
            out[y * width + x] = val.round().clamp(0.0, 255.0) as u8;
        }
    }
    out
}

fn extend_reflect101(
    src: &[u8],
    width: usize,
    height: usize,
    tiles: usize,
) -> (Vec<u8>, usize, usize) {
    let ext_w = width.div_ceil(tiles) * tiles;
    let ext_h = height.div_ceil(tiles) * tiles;
    let mut ext = vec![0u8; ext_w * ext_h];
    for y in 0..ext_h {
        let sy = reflect101(y, height);
        for x in 0..ext_w {
            let sx = reflect101(x, width);
            ext[y * ext_w + x] = src[sy * width + sx];
        }
    }
    (ext, ext_w, ext_h)
}

fn reflect101(i: usize, len: usize) -> usize {
    if len == 1 {
        return 0;
    }
    let period = 2 * len - 2;
    let r = i % period;
    if r >= len {
        period - r
    } else {
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_input_stays_constant() {
        let src = vec![100u8; 32 * 32];
        let out = clahe_u8(&src, 32, 32, 2.0, 8);
        let first = out[0];
        assert!(out.iter().all(|&v| v == first));
    }

    #[test]
    fn output_dims_match_input_with_extension() {
        let src: Vec<u8> = (0..37 * 29).map(|i| (i % 251) as u8).collect();
        let out = clahe_u8(&src, 37, 29, 2.0, 8);
        assert_eq!(out.len(), 37 * 29);
    }

    #[test]
    fn reflect101_indexing() {
        assert_eq!(reflect101(0, 5), 0);
        assert_eq!(reflect101(4, 5), 4);
        assert_eq!(reflect101(5, 5), 3);
        assert_eq!(reflect101(6, 5), 2);
        assert_eq!(reflect101(8, 5), 0);
        assert_eq!(reflect101(9, 5), 1);
        assert_eq!(reflect101(3, 1), 0);
    }

    #[test]
    fn equalization_spreads_a_two_level_image() {
        // Half dark, half bright: CLAHE with a generous clip approaches
        // plain equalization inside each tile.
        let mut src = vec![60u8; 16 * 16];
        for v in src.iter_mut().skip(16 * 8) {
            *v = 190;
        }
        let out = clahe_u8(&src, 16, 16, 40.0, 2);
        assert!(out.iter().any(|&v| v > 200));
    }
}
