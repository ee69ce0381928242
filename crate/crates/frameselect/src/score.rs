use crate::SelectError;

/// Binary entropy in bits, with `H(0) = H(1) = 0`.
pub fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -(p * p.log2() + (1.0 - p) * (1.0 - p).log2())
}

/// Centrality of a pixel centroid: the mean of the binary entropies of the
/// normalized coordinates. 1 at the frame center, 0 on the boundary.
pub fn position_score(centroid: [f64; 2], width: f64, height: f64) -> Result<f64, SelectError> {
    let [u, v] = centroid;
    let inside = width > 0.0 && height > 0.0 && (0.0..=width).contains(&u) && (0.0..=height).contains(&v);
    if !inside {
        return Err(SelectError::OutOfFrame { u, v, width, height });
    }
    Ok(0.5 * binary_entropy(u / width) + 0.5 * binary_entropy(v / height))
}

/// `max(0, tanh((area - a_min) / a_sat))`.
pub fn size_score(area_px: f64, a_min: f64, a_sat: f64) -> f64 {
    debug_assert!(a_sat > 0.0);
    ((area_px - a_min) / a_sat).tanh().max(0.0)
}

pub fn quality(q_pos: f64, q_size: f64, alpha: f64) -> f64 {
    alpha * q_pos + (1.0 - alpha) * q_size
}
