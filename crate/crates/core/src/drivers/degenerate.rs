use std::sync::Arc;

use crate::area::{AreaKind, AreaProcess};
use crate::error::Result;
use crate::path::DriverPath;

/// `A^{ij}(s,t) = -x^i(s) (x^j(t) - x^j(s))` on every fine interval.
///
/// This choice satisfies the Chen relation identically, so coarse pairs agree
/// with the same formula evaluated directly.
pub fn degenerate_area(path: Arc<DriverPath>) -> Result<AreaProcess> {
    let d = path.dim();
    let mut fine = Vec::with_capacity((path.len() - 1) * d * d);
    for k in 0..path.len() - 1 {
        let xk = path.value(k);
        let dx = path.increment(k, k + 1);
        for i in 0..d {
            for j in 0..d {
                fine.push(-xk[i] * dx[j]);
            }
        }
    }
    AreaProcess::from_fine(path, AreaKind::Degenerate, fine)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::area::chen_combine;
    use crate::partition::Partition;
    use proptest::prelude::*;

    #[test]
    fn vanishes_from_origin() {
        let g = Partition::uniform(0.0, 1.0, 10).unwrap();
        let x = Arc::new(DriverPath::from_fn(g, 2, |t| vec![t.sin(), t * t]).unwrap());
        let a = degenerate_area(x).unwrap();
        for m in 0..=10 {
            for v in a.area(0, m) {
                assert!(v.abs() < 1e-15);
            }
        }
        assert_eq!(a.kind(), AreaKind::Degenerate);
    }

    #[test]
    fn linear_path() {
        let g = Partition::uniform(0.0, 1.0, 8).unwrap();
        let x = Arc::new(DriverPath::from_fn(g, 1, |t| vec![t]).unwrap());
        let a = degenerate_area(Arc::clone(&x)).unwrap();
        for k in 0..=8 {
            for m in k..=8 {
                let (s, t) = (x.time(k), x.time(m));
                assert!((a.entry(k, m, 0, 0) + s * (t - s)).abs() < 1e-15);
            }
        }
    }

    proptest! {
        #[test]
        fn chen_holds(v in prop::collection::vec(-2.0f64..2.0, 2 * 31), i in 0usize..31, j in 0usize..31, k in 0usize..31) {
            let g = Partition::uniform(0.0, 1.0, 30).unwrap();
            let x = Arc::new(DriverPath::from_flat(g, 2, v).unwrap());
            let a = degenerate_area(Arc::clone(&x)).unwrap();
            let mut t = [i, j, k];
            t.sort();
            let [s, t, u] = t;
            let direct: Vec<f64> = {
                let (xs, du) = (x.value(s), x.increment(s, u));
                (0..4).map(|e| -xs[e / 2] * du[e % 2]).collect()
            };
            let chen = chen_combine(&a.area(s, t), &a.area(t, u), &x.increment(s, t), &x.increment(t, u)).unwrap();
            for e in 0..4 {
                prop_assert!((a.area(s, u)[e] - direct[e]).abs() <= 1e-12);
                prop_assert!((chen[e] - direct[e]).abs() <= 1e-12);
            }
        }
    }
}
