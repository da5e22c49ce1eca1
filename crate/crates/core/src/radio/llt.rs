use crate::grid::Vec2;

/// Predicted time until two nodes drift out of range, assuming both keep their
/// current velocity. Returns `cap_s` for links that never expire and 0 for
/// nodes already out of range.
pub fn estimate_llt(pos_i: Vec2, vel_i: Vec2, pos_j: Vec2, vel_j: Vec2, range_m: f64, cap_s: f64) -> f64 {
    let dp = pos_j - pos_i;
    let dv = vel_j - vel_i;
    let c = dp.norm_sq() - range_m * range_m;
    if c > 0.0 {
        return 0.0;
    }
    let a = dv.norm_sq();
    if a == 0.0 {
        return cap_s;
    }
    let b = 2.0 * dp.dot(dv);
    // a > 0, c <= 0: exactly one non-negative root.
    let disc = (b * b - 4.0 * a * c).max(0.0);
    let t = (-b + disc.sqrt()) / (2.0 * a);
    t.clamp(0.0, cap_s)
}

#[cfg(test)]
mod tests {
    use super::*;

    const CAP: f64 = 3600.0;

    #[test]
    fn head_on_crossing() {
        let t = estimate_llt(Vec2::ZERO, Vec2::new(20.0, 0.0), Vec2::ZERO, Vec2::new(-20.0, 0.0), 1000.0, CAP);
        assert!((t - 25.0).abs() < 1e-12);
    }

    #[test]
    fn identical_velocity_never_expires() {
        let v = Vec2::new(13.0, -7.0);
        assert_eq!(estimate_llt(Vec2::ZERO, v, Vec2::new(400.0, 0.0), v, 1000.0, CAP), CAP);
    }

    #[test]
    fn stationary_pair() {
        assert_eq!(estimate_llt(Vec2::ZERO, Vec2::ZERO, Vec2::new(500.0, 0.0), Vec2::ZERO, 1000.0, CAP), CAP);
    }

    #[test]
    fn out_of_range_is_zero() {
        assert_eq!(estimate_llt(Vec2::ZERO, Vec2::ZERO, Vec2::new(1001.0, 0.0), Vec2::new(1.0, 0.0), 1000.0, CAP), 0.0);
    }

    #[test]
    fn approaching_then_leaving() {
        // 600 m apart closing at 40 m/s: meets after 15 s, separates to 1000 m after 40 s
        let t = estimate_llt(Vec2::ZERO, Vec2::ZERO, Vec2::new(600.0, 0.0), Vec2::new(-40.0, 0.0), 1000.0, CAP);
        assert!((t - 40.0).abs() < 1e-12);
    }

    #[test]
    fn slow_divergence_is_capped() {
        let t = estimate_llt(Vec2::ZERO, Vec2::ZERO, Vec2::new(10.0, 0.0), Vec2::new(1e-4, 0.0), 1000.0, CAP);
        assert_eq!(t, CAP);
    }
}
