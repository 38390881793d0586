//! Eigenvalue clustering, Jordan chain lengths and spectral projectors of a
//! real matrix, computed on a balanced copy.

use nalgebra::{Complex, DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parlett–Reinsch balancing: returns (B, d) with B = D⁻¹ M D, D = diag(d).
pub fn balance(m: &DMatrix<f64>) -> (DMatrix<f64>, DVector<f64>) {
    let n = m.nrows();
    let mut b = m.clone();
    let mut d = DVector::from_element(n, 1.0);
    for _ in 0..100 {
        let mut done = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += b[(j, i)].abs();
                    r += b[(i, j)].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / 2.0;
            while c < g {
                f *= 2.0;
                c *= 4.0;
            }
            g = r * 2.0;
            while c > g {
                f /= 2.0;
                c /= 4.0;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                d[i] *= f;
                b.row_mut(i).scale_mut(1.0 / f);
                b.column_mut(i).scale_mut(f);
            }
        }
        if done {
            break;
        }
    }
    (b, d)
}

/// Eigenvalues of a real square matrix.
pub fn eigenvalues(m: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    let fm = faer::Mat::<f64>::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)]);
    let eig = fm
        .eigenvalues()
        .map_err(|e| Error::InvalidArgument(format!("eigenvalue iteration failed: {e:?}")))?;
    Ok(eig.iter().map(|z| Complex64::new(z.re, z.im)).collect())
}

/// D X D⁻¹ for a matrix X in balanced coordinates.
pub fn unbalance<T: nalgebra::ComplexField<RealField = f64> + Copy>(x: &DMatrix<T>, d: &DVector<f64>) -> DMatrix<T> {
    let mut out = x.clone();
    for i in 0..x.nrows() {
        for j in 0..x.ncols() {
            out[(i, j)] = x[(i, j)].scale(d[i] / d[j]);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JordanOptions {
    /// Eigenvalues closer than this times ‖Λ‖ are one cluster.
    pub cluster_rel: f64,
    /// Singular values below this times ‖Λ − μI‖^k count as zero in the
    /// rank of (Λ − μI)^k.
    pub rank_rel: f64,
}

impl Default for JordanOptions {
    fn default() -> Self {
        Self {
            cluster_rel: 1e-6,
            rank_rel: 1e-6,
        }
    }
}

/// Eigenvalues treated as one multiple eigenvalue.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenCluster {
    /// Mean of the members.
    pub eigenvalue: Complex64,
    pub members: Vec<Complex64>,
    /// Jordan block sizes, largest first.
    pub chains: Vec<usize>,
}

impl EigenCluster {
    pub fn multiplicity(&self) -> usize {
        self.members.len()
    }

    pub fn geometric_multiplicity(&self) -> usize {
        self.chains.len()
    }

    pub fn max_chain(&self) -> usize {
        self.chains.first().copied().unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Eigenstructure {
    pub clusters: Vec<EigenCluster>,
}

impl Eigenstructure {
    /// Cluster means repeated by multiplicity. Members of a defective
    /// cluster split like the square root of the perturbation; their mean
    /// does not.
    pub fn exponents(&self) -> Vec<Complex64> {
        self.clusters
            .iter()
            .flat_map(|c| std::iter::repeat_n(c.eigenvalue, c.multiplicity()))
            .collect()
    }

    /// Largest distance of a member eigenvalue from its cluster mean.
    pub fn spread(&self) -> f64 {
        self.clusters
            .iter()
            .flat_map(|c| c.members.iter().map(move |z| (z - c.eigenvalue).norm()))
            .fold(0.0, f64::max)
    }

    pub fn eigenvalues(&self) -> Vec<Complex64> {
        self.clusters.iter().flat_map(|c| c.members.iter().copied()).collect()
    }

    pub fn geometric_multiplicity(&self) -> usize {
        self.clusters.iter().map(EigenCluster::geometric_multiplicity).sum()
    }
}

fn to_complex(m: &DMatrix<f64>) -> DMatrix<Complex64> {
    m.map(|x| Complex::new(x, 0.0))
}

fn shifted(b: &DMatrix<f64>, mu: Complex64) -> DMatrix<Complex64> {
    let mut n = to_complex(b);
    for i in 0..n.nrows() {
        n[(i, i)] -= mu;
    }
    n
}

fn rank(m: &DMatrix<Complex64>, threshold: f64) -> usize {
    m.clone().singular_values().iter().filter(|&&s| s > threshold).count()
}

fn cluster_eigenvalues(eigs: &[Complex64], tol: f64) -> Vec<Vec<Complex64>> {
    let n = eigs.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut Vec<usize>, i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        p[i] = r;
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            if (eigs[i] - eigs[j]).norm() <= tol {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a] = b;
            }
        }
    }
    let mut groups: Vec<(usize, Vec<Complex64>)> = Vec::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        match groups.iter_mut().find(|(root, _)| *root == r) {
            Some((_, g)) => g.push(eigs[i]),
            None => groups.push((r, vec![eigs[i]])),
        }
    }
    let mut out: Vec<Vec<Complex64>> = groups.into_iter().map(|(_, g)| g).collect();
    out.sort_by(|a, b| {
        let (ma, mb) = (mean(a), mean(b));
        ma.re.partial_cmp(&mb.re).unwrap().then(ma.im.partial_cmp(&mb.im).unwrap())
    });
    out
}

fn mean(v: &[Complex64]) -> Complex64 {
    v.iter().sum::<Complex64>() / v.len() as f64
}

/// Chain lengths from the ranks r_k of (Λ − μI)^k, k = 1..=m.
fn chains_from_ranks(n: usize, m: usize, ranks: &[usize]) -> Vec<usize> {
    // blocks of size ≥ k: r_{k−1} − r_k
    let mut at_least = Vec::with_capacity(m + 1);
    let mut prev = n;
    for &r in ranks {
        at_least.push(prev.saturating_sub(r));
        prev = r;
    }
    at_least.push(0);
    let mut chains = Vec::new();
    for k in (1..=m).rev() {
        let exactly = at_least[k - 1].saturating_sub(at_least[k]);
        chains.extend(std::iter::repeat(k).take(exactly));
    }
    let total: usize = chains.iter().sum();
    if total != m || chains.is_empty() {
        log::warn!("inconsistent rank sequence {ranks:?} for multiplicity {m}; treating as semisimple");
        return vec![1; m];
    }
    chains
}

pub fn analyze(lambda: &DMatrix<f64>, opts: JordanOptions) -> Result<Eigenstructure> {
    if !lambda.is_square() || lambda.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument("eigen analysis needs a finite square matrix".into()));
    }
    let n = lambda.nrows();
    let (b, _) = balance(lambda);
    let scale = b.clone().singular_values().max().max(f64::MIN_POSITIVE);
    let eigs = eigenvalues(&b)?;
    let mut clusters = Vec::new();
    for members in cluster_eigenvalues(&eigs, opts.cluster_rel * scale) {
        let mu = mean(&members);
        let m = members.len();
        let shift = shifted(&b, mu);
        let norm = shift.clone().singular_values().max();
        let mut power = shift.clone();
        let mut ranks = Vec::with_capacity(m);
        for k in 1..=m {
            if k > 1 {
                power = &power * &shift;
            }
            ranks.push(rank(&power, opts.rank_rel * norm.powi(k as i32)));
        }
        clusters.push(EigenCluster {
            eigenvalue: mu,
            members,
            chains: chains_from_ranks(n, m, &ranks),
        });
    }
    Ok(Eigenstructure { clusters })
}

/// Orthonormal basis of the span of the `k` right singular vectors of `m`
/// with smallest singular values.
fn null_basis(m: &DMatrix<Complex64>, k: usize) -> Result<DMatrix<Complex64>> {
    let n = m.ncols();
    let svd = m.clone().svd(false, true);
    let vt = svd.v_t.ok_or_else(|| Error::InvalidArgument("SVD did not converge".into()))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| svd.singular_values[a].partial_cmp(&svd.singular_values[b]).unwrap());
    let mut basis = DMatrix::zeros(n, k);
    for (col, &idx) in order.iter().take(k).enumerate() {
        for i in 0..n {
            basis[(i, col)] = vt[(idx, i)].conj();
        }
    }
    Ok(basis)
}

/// Spectral projector onto the generalized eigenspace of `cluster`, along
/// the other generalized eigenspaces.
pub fn spectral_projector(lambda: &DMatrix<f64>, cluster: &EigenCluster) -> Result<DMatrix<Complex64>> {
    let n = lambda.nrows();
    let m = cluster.multiplicity();
    if m == n {
        return Ok(DMatrix::identity(n, n));
    }
    let (b, d) = balance(lambda);
    let shift = shifted(&b, cluster.eigenvalue);
    let mut power = shift.clone();
    for _ in 1..cluster.max_chain().max(1) {
        power = &power * &shift;
    }
    let w = null_basis(&power, m)?;
    let y = null_basis(&power.adjoint(), m)?;
    let inner = (y.adjoint() * &w)
        .try_inverse()
        .ok_or(Error::NearSingular { condition: f64::INFINITY })?;
    Ok(unbalance(&(w * inner * y.adjoint()), &d))
}
