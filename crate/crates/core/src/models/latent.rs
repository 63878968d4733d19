//! Latent laws: the iid normal pair used in closed form by the entry game,
//! and fixed weighted node sets that discretize any latent law.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::normal;

/// Weighted latent point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub point: Vec<f64>,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum LatentSpec {
    /// Independent standard normal coordinates, integrated in closed form.
    BivariateNormalIID,
    /// A discrete latent law on the given nodes. `label` records how the
    /// nodes were generated.
    FixedNodes { nodes: Vec<Node>, label: String },
}

impl LatentSpec {
    pub fn fixed_nodes(nodes: Vec<Node>, label: impl Into<String>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::InvalidArgument("empty node set".into()));
        }
        let dim = nodes[0].point.len();
        if nodes.iter().any(|n| n.point.len() != dim || !(n.weight >= 0.0) || n.point.iter().any(|v| !v.is_finite())) {
            return Err(Error::InvalidArgument("nodes must share a dimension and carry nonnegative weights".into()));
        }
        let total: f64 = nodes.iter().map(|n| n.weight).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!("node weights sum to {total}")));
        }
        Ok(LatentSpec::FixedNodes {
            nodes,
            label: label.into(),
        })
    }

    /// Tensor-product Gauss-Hermite rule for `dim` iid standard normals.
    pub fn gauss_hermite(dim: usize, per_dim: usize) -> Result<Self> {
        if dim == 0 || per_dim == 0 {
            return Err(Error::InvalidArgument("Gauss-Hermite rule needs positive dimension and order".into()));
        }
        let total = per_dim
            .checked_pow(dim as u32)
            .filter(|&t| t <= 5_000_000)
            .ok_or_else(|| Error::InvalidArgument("tensor rule too large".into()))?;
        let (x, w) = hermite_rule(per_dim);
        let mut nodes = Vec::with_capacity(total);
        for flat in 0..total {
            let mut rem = flat;
            let mut point = Vec::with_capacity(dim);
            let mut weight = 1.0;
            for _ in 0..dim {
                let k = rem % per_dim;
                rem /= per_dim;
                point.push(x[k]);
                weight *= w[k];
            }
            nodes.push(Node { point, weight });
        }
        normalize(&mut nodes);
        Self::fixed_nodes(nodes, format!("gauss-hermite dim={dim} order={per_dim}"))
    }

    /// Randomly shifted Halton points mapped through the normal quantile,
    /// equally weighted.
    pub fn halton(dim: usize, count: usize, seed: u64) -> Result<Self> {
        const PRIMES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
        if dim == 0 || dim > PRIMES.len() || count == 0 {
            return Err(Error::InvalidArgument(format!("Halton rule supports 1..={} dimensions", PRIMES.len())));
        }
        let mut rng = crate::rng::stream(seed, 0, crate::rng::Purpose::Auxiliary);
        let shift: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>()).collect();
        let nodes = (1..=count as u64)
            .map(|i| Node {
                point: (0..dim)
                    .map(|d| {
                        let v = (radical_inverse(i, PRIMES[d]) + shift[d]).fract();
                        normal::quantile(v.clamp(1e-12, 1.0 - 1e-12))
                    })
                    .collect(),
                weight: 1.0 / count as f64,
            })
            .collect();
        Self::fixed_nodes(nodes, format!("halton dim={dim} count={count} seed={seed}"))
    }

    pub fn nodes(&self) -> Option<&[Node]> {
        match self {
            LatentSpec::FixedNodes { nodes, .. } => Some(nodes),
            LatentSpec::BivariateNormalIID => None,
        }
    }

    /// Dimension of the latent vector, if the law fixes it.
    pub fn dim(&self) -> Option<usize> {
        match self {
            LatentSpec::FixedNodes { nodes, .. } => Some(nodes[0].point.len()),
            LatentSpec::BivariateNormalIID => Some(2),
        }
    }

    /// Draws one latent vector from the law.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        match self {
            LatentSpec::BivariateNormalIID => (0..2).map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal)).collect(),
            LatentSpec::FixedNodes { nodes, .. } => {
                let u: f64 = rng.gen();
                let mut acc = 0.0;
                for n in nodes {
                    acc += n.weight;
                    if u < acc {
                        return n.point.clone();
                    }
                }
                nodes.last().expect("nonempty").point.clone()
            }
        }
    }
}

fn normalize(nodes: &mut [Node]) {
    let total: f64 = nodes.iter().map(|n| n.weight).sum();
    for n in nodes.iter_mut() {
        n.weight /= total;
    }
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let mut inv = 1.0 / base as f64;
    let mut out = 0.0;
    while i > 0 {
        out += (i % base) as f64 * inv;
        i /= base;
        inv /= base as f64;
    }
    out
}

/// Nodes and weights of the `n`-point Gauss-Hermite rule for the standard
/// normal law (Golub-Welsch), nodes ascending.
pub fn hermite_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut jacobi = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let b = (k as f64).sqrt();
        jacobi[(k - 1, k)] = b;
        jacobi[(k, k - 1)] = b;
    }
    let eig = SymmetricEigen::new(jacobi);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|k| (eig.eigenvalues[k], eig.eigenvectors[(0, k)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    // Symmetrize away eigen-solver round-off.
    for k in 0..n / 2 {
        let x = 0.5 * (pairs[n - 1 - k].0 - pairs[k].0);
        let w = 0.5 * (pairs[n - 1 - k].1 + pairs[k].1);
        pairs[k] = (-x, w);
        pairs[n - 1 - k] = (x, w);
    }
    if n % 2 == 1 {
        pairs[n / 2].0 = 0.0;
    }
    let total: f64 = pairs.iter().map(|p| p.1).sum();
    (pairs.iter().map(|p| p.0).collect(), pairs.iter().map(|p| p.1 / total).collect())
}
