//! LLL lattice basis reduction with exact rational arithmetic.
//!
//! Arithmetic is exact (`BigRational`) end to end, so the companion checking
//! functions — size reduction, the Lovász condition, and lattice equality via
//! integer change of basis — are decision procedures, not approximations.
//! A reduced-basis initializer for network parameters builds one lattice
//! vector per layer's encoded parameter block.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::constraints::encoding::{project_network, EncodingMap};
use crate::error::{Error, Result};
use crate::network::Network;

/// A list of m ≤ dim lattice-generating vectors. Linear independence is
/// validated by the operations that require it (reduction and the oracles).
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeBasis {
    vectors: Vec<Vec<BigRational>>,
    dim: usize,
}

impl LatticeBasis {
    pub fn from_integers(rows: &[Vec<i64>]) -> Result<Self> {
        let vectors: Vec<Vec<BigRational>> = rows
            .iter()
            .map(|row| {
                row.iter()
                    .map(|&v| BigRational::from_integer(BigInt::from(v)))
                    .collect()
            })
            .collect();
        Self::from_rationals(vectors)
    }

    pub fn from_rationals(vectors: Vec<Vec<BigRational>>) -> Result<Self> {
        let dim = vectors.first().map_or(0, Vec::len);
        if vectors.is_empty() || dim == 0 {
            return Err(Error::Shape("empty lattice basis".into()));
        }
        if vectors.iter().any(|v| v.len() != dim) {
            return Err(Error::Shape("ragged lattice basis".into()));
        }
        if vectors.len() > dim {
            return Err(Error::Rank(format!(
                "{} vectors cannot be independent in dimension {dim}",
                vectors.len()
            )));
        }
        Ok(Self { vectors, dim })
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vectors(&self) -> &[Vec<BigRational>] {
        &self.vectors
    }

    /// Extract integer entries; fails if any entry is non-integral or does
    /// not fit in 64 bits.
    pub fn vectors_i64(&self) -> Result<Vec<Vec<i64>>> {
        self.vectors
            .iter()
            .map(|row| {
                row.iter()
                    .map(|r| {
                        if !r.is_integer() {
                            return Err(Error::Domain(
                                "lattice vector entry is not an integer".into(),
                            ));
                        }
                        r.to_integer().to_i64().ok_or_else(|| {
                            Error::Overflow("lattice vector entry exceeds 64 bits".into())
                        })
                    })
                    .collect()
            })
            .collect()
    }
}

struct GramSchmidt {
    /// Coefficients μ_ij = ⟨b_i, b*_j⟩ / ⟨b*_j, b*_j⟩ for j < i.
    mu: Vec<Vec<BigRational>>,
    /// Squared norms ‖b*_i‖².
    norms: Vec<BigRational>,
}

fn dot(a: &[BigRational], b: &[BigRational]) -> BigRational {
    a.iter()
        .zip(b)
        .fold(BigRational::zero(), |acc, (x, y)| acc + x * y)
}

fn gram_schmidt(vectors: &[Vec<BigRational>]) -> Result<GramSchmidt> {
    let n = vectors.len();
    let mut star: Vec<Vec<BigRational>> = Vec::with_capacity(n);
    let mut mu = vec![vec![BigRational::zero(); n]; n];
    let mut norms: Vec<BigRational> = Vec::with_capacity(n);
    for i in 0..n {
        let mut v = vectors[i].clone();
        for j in 0..i {
            let m = dot(&vectors[i], &star[j]) / &norms[j];
            for (vk, sk) in v.iter_mut().zip(&star[j]) {
                *vk -= &m * sk;
            }
            mu[i][j] = m;
        }
        let n2 = dot(&v, &v);
        if n2.is_zero() {
            return Err(Error::Rank(format!(
                "basis vector {i} is linearly dependent on its predecessors"
            )));
        }
        star.push(v);
        norms.push(n2);
    }
    Ok(GramSchmidt { mu, norms })
}

fn rational_delta(delta: f64) -> Result<BigRational> {
    if !(delta > 0.25 && delta < 1.0) {
        return Err(Error::Domain(format!(
            "LLL parameter must lie in (1/4, 1), got {delta}"
        )));
    }
    BigRational::from_float(delta)
        .ok_or_else(|| Error::NonFinite("LLL parameter".into()))
}

/// LLL-reduce a basis at parameter `delta ∈ (1/4, 1)`. The output generates
/// the same lattice, is size-reduced (all `|μ_ij| ≤ 1/2`), and satisfies the
/// Lovász condition at `delta`.
pub fn lll_reduce(basis: &LatticeBasis, delta: f64) -> Result<LatticeBasis> {
    let delta = rational_delta(delta)?;
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let mut b = basis.vectors.clone();
    let n = b.len();
    let mut gs = gram_schmidt(&b)?;
    let mut k = 1;
    while k < n {
        for j in (0..k).rev() {
            if gs.mu[k][j].abs() > half {
                let r = gs.mu[k][j].round();
                let bj = b[j].clone();
                for (bk, bjv) in b[k].iter_mut().zip(&bj) {
                    *bk -= &r * bjv;
                }
                gs = gram_schmidt(&b)?;
            }
        }
        let mu2 = &gs.mu[k][k - 1] * &gs.mu[k][k - 1];
        let rhs = (&delta - &mu2) * &gs.norms[k - 1];
        if gs.norms[k] >= rhs {
            k += 1;
        } else {
            b.swap(k, k - 1);
            gs = gram_schmidt(&b)?;
            k = if k > 1 { k - 1 } else { 1 };
        }
    }
    Ok(LatticeBasis {
        vectors: b,
        dim: basis.dim,
    })
}

/// Exact check: all Gram–Schmidt coefficients satisfy `|μ_ij| ≤ 1/2`.
pub fn is_size_reduced(basis: &LatticeBasis) -> Result<bool> {
    let gs = gram_schmidt(&basis.vectors)?;
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    for i in 0..basis.len() {
        for j in 0..i {
            if gs.mu[i][j].abs() > half {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Exact check of the Lovász condition
/// `‖b*_k‖² ≥ (δ − μ²_{k,k−1})·‖b*_{k−1}‖²` for every consecutive pair.
pub fn satisfies_lovasz(basis: &LatticeBasis, delta: f64) -> Result<bool> {
    let delta = rational_delta(delta)?;
    let gs = gram_schmidt(&basis.vectors)?;
    for k in 1..basis.len() {
        let mu2 = &gs.mu[k][k - 1] * &gs.mu[k][k - 1];
        let rhs = (&delta - &mu2) * &gs.norms[k - 1];
        if gs.norms[k] < rhs {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Express `v` in the span of `basis`: coefficients `c` with `Σ cᵢ bᵢ = v`,
/// or `None` when `v` lies outside the span. Exact Gaussian elimination.
fn express(basis: &[Vec<BigRational>], v: &[BigRational]) -> Option<Vec<BigRational>> {
    let m = basis.len();
    let d = v.len();
    // Equations over unknown coefficients: rows are dimensions.
    let mut aug: Vec<Vec<BigRational>> = (0..d)
        .map(|j| {
            let mut row: Vec<BigRational> = basis.iter().map(|b| b[j].clone()).collect();
            row.push(v[j].clone());
            row
        })
        .collect();
    let mut pivot_of_col: Vec<Option<usize>> = vec![None; m];
    let mut row = 0;
    for col in 0..m {
        let Some(pivot) = (row..d).find(|&r| !aug[r][col].is_zero()) else {
            continue;
        };
        aug.swap(row, pivot);
        let p = aug[row][col].clone();
        for entry in aug[row].iter_mut() {
            *entry /= &p;
        }
        for r in 0..d {
            if r != row && !aug[r][col].is_zero() {
                let factor = aug[r][col].clone();
                let lead = aug[row].clone();
                for (e, l) in aug[r].iter_mut().zip(&lead) {
                    *e -= &factor * l;
                }
            }
        }
        pivot_of_col[col] = Some(row);
        row += 1;
    }
    // Inconsistent rows mean v is outside the span.
    if aug[row..d].iter().any(|r| !r[m].is_zero()) {
        return None;
    }
    let mut c = vec![BigRational::zero(); m];
    for (col, pivot) in pivot_of_col.iter().enumerate() {
        if let Some(r) = pivot {
            c[col] = aug[*r][m].clone();
        }
    }
    Some(c)
}

/// Exact check that two bases generate the same lattice: every vector of each
/// basis must be an integer combination of the other (the two directions
/// force the change of basis to be unimodular).
pub fn same_lattice(a: &LatticeBasis, b: &LatticeBasis) -> Result<bool> {
    if a.dim != b.dim || a.len() != b.len() {
        return Ok(false);
    }
    let integral = |basis: &LatticeBasis, v: &[BigRational]| -> bool {
        match express(&basis.vectors, v) {
            Some(c) => c.iter().all(BigRational::is_integer),
            None => false,
        }
    };
    Ok(b.vectors.iter().all(|v| integral(a, v))
        && a.vectors.iter().all(|v| integral(b, v)))
}

/// Why an initialization attempt fell back instead of using the reduction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LllFallback {
    /// Encoded parameter blocks were linearly dependent.
    RankDeficient,
    /// The reduced parameters would have grown the maximum magnitude.
    MagnitudeGuard,
}

/// Result of [`lll_init`]: the initialized network plus what happened.
#[derive(Debug, Clone)]
pub struct LllInitOutcome {
    pub network: Network,
    /// True when the reduced basis was written back into the parameters.
    pub reduced: bool,
    pub fallback: Option<LllFallback>,
}

/// Initialize parameters through lattice reduction: encode each layer's
/// flattened parameter block as one lattice vector (zero-padded to a common
/// dimension), LLL-reduce, and decode the reduced vectors back (padding is
/// truncated on write-back). Rank-deficient blocks fall back to plain integer
/// projection; a result that would grow the maximum parameter magnitude falls
/// back to the unchanged network. Either fallback is reported in the outcome.
pub fn lll_init(net: &Network, map: &EncodingMap, delta: f64) -> Result<LllInitOutcome> {
    let blocks: Vec<Vec<f64>> = net
        .layers()
        .iter()
        .map(|layer| {
            let mut block = layer.weights.data().to_vec();
            block.extend_from_slice(layer.bias.data());
            block
        })
        .collect();
    let dim = blocks.iter().map(Vec::len).max().unwrap_or(0);
    let padded: Vec<Vec<i64>> = blocks
        .iter()
        .map(|block| {
            let mut row = map.encode(block);
            row.resize(dim, 0);
            row
        })
        .collect();
    let orig_max = max_abs(&net.flat_params());

    let reduced = match LatticeBasis::from_integers(&padded).and_then(|b| lll_reduce(&b, delta))
    {
        Ok(basis) => basis,
        Err(Error::Rank(_)) => {
            let mut network = net.clone();
            project_network(&mut network)?;
            if max_abs(&network.flat_params()) > orig_max {
                network = net.clone();
            }
            return Ok(LllInitOutcome {
                network,
                reduced: false,
                fallback: Some(LllFallback::RankDeficient),
            });
        }
        Err(e) => return Err(e),
    };

    let rows = reduced.vectors_i64()?;
    let mut theta = Vec::with_capacity(net.param_count());
    for (row, block) in rows.iter().zip(&blocks) {
        theta.extend(map.decode(&row[..block.len()]));
    }
    let mut network = net.clone();
    network.set_flat_params(&theta)?;
    if max_abs(&theta) > orig_max {
        return Ok(LllInitOutcome {
            network: net.clone(),
            reduced: false,
            fallback: Some(LllFallback::MagnitudeGuard),
        });
    }
    Ok(LllInitOutcome {
        network,
        reduced: true,
        fallback: None,
    })
}

fn max_abs(values: &[f64]) -> f64 {
    values.iter().fold(0.0, |m, v| m.max(v.abs()))
}
