use super::{Capacity, OutcomeSet};
use crate::error::{Error, Result};

/// Choquet integral of per-outcome values `f` with respect to `c`.
///
/// Computed as the finite layer cake over the sorted values of `f`:
/// `int f dc = sum_i (f_(i) - f_(i+1)) c({f >= f_(i)}) + f_min`, which is the
/// two-term definition specialized to a normalized capacity on a finite space.
pub fn choquet_integral(f: &[f64], c: &Capacity) -> Result<f64> {
    let m = c.cardinality();
    if f.len() != m {
        return Err(Error::InvalidArgument(format!(
            "integrand has {} values, space has {m}",
            f.len()
        )));
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| f[b].total_cmp(&f[a]).then(a.cmp(&b)));
    let f_min = f[order[m - 1]];
    let mut upper = OutcomeSet::EMPTY;
    let mut total = f_min;
    for w in 0..m - 1 {
        upper.insert(order[w]);
        let step = f[order[w]] - f[order[w + 1]];
        if step > 0.0 {
            total += step * c.value(upper);
        }
    }
    Ok(total)
}
