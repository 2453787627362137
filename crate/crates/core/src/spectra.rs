//! Schreier graphs on tree levels, Hecke-type operators and their spectra,
//! and the determinant recursion for the basilica group.

use std::collections::VecDeque;
use std::fmt::Write as _;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::automaton::{builtin, format_vertex, SignedState, Transducer};
use crate::elements::{index_to_vertex, LevelAction};

/// Largest vertex count of a Schreier graph.
pub const MAX_GRAPH_VERTICES: usize = 1 << 20;

/// Largest matrix handed to the dense eigensolver.
pub const MAX_EIGEN_SIZE: usize = 1 << 13;

/// Residual bound per eigenpair, relative to the matrix norm.
pub const EIGEN_RESIDUAL: f64 = 1e-8;

#[derive(Debug, Error, PartialEq)]
pub enum SpectraError {
    #[error("{what} of size {size} exceeds the budget of {limit}")]
    Budget {
        what: &'static str,
        size: usize,
        limit: usize,
    },
    #[error("eigenpair residual {residual:e} exceeds {EIGEN_RESIDUAL:e}·‖M‖")]
    Convergence { residual: f64 },
    #[error("unknown generator label {0}")]
    UnknownLabel(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Labeled graph on the vertices of one level. Each label is a permutation of
/// the vertices; inverse edges are implied.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchreierGraph {
    pub level: usize,
    pub degree: usize,
    pub labels: Vec<String>,
    /// `targets[l][v]` is the head of the `l`-labelled edge leaving `v`
    pub targets: Vec<Vec<u32>>,
    pub root: u32,
}

impl SchreierGraph {
    pub fn vertex_count(&self) -> usize {
        self.targets.first().map_or(1, Vec::len)
    }

    /// Number of edge ends at `v`, loops counting twice, over labels and inverses.
    pub fn vertex_degree(&self, v: u32) -> usize {
        self.targets
            .iter()
            .map(|t| {
                let incoming = t.iter().filter(|&&w| w == v).count();
                1 + incoming
            })
            .sum()
    }

    /// Vertex name as a word over the alphabet for level graphs, else its index.
    pub fn vertex_name(&self, v: u32) -> String {
        if self.degree >= 2 {
            format_vertex(
                &index_to_vertex(v as usize, self.degree, self.level),
                self.degree,
            )
        } else {
            v.to_string()
        }
    }
}

/// The Schreier graph of level `n` for the primary generators, rooted at the
/// vertex `𝟏ⁿ`.
pub fn schreier_graph(t: &Transducer, n: usize) -> Result<SchreierGraph, SpectraError> {
    let d = t.alphabet_size();
    let size = d.checked_pow(n as u32).filter(|&s| s <= MAX_GRAPH_VERTICES);
    let Some(_) = size else {
        return Err(SpectraError::Budget {
            what: "graph",
            size: usize::MAX,
            limit: MAX_GRAPH_VERTICES,
        });
    };
    let action = LevelAction::new(t, n);
    let gens = t.primary_generators();
    Ok(SchreierGraph {
        level: n,
        degree: d,
        labels: gens.iter().map(|&q| t.name(q).to_string()).collect(),
        targets: gens
            .iter()
            .map(|&q| action.generator(SignedState::positive(q)).to_vec())
            .collect(),
        root: 0,
    })
}

/// Builds a level graph of the basilica group from the recursive description
/// by polygons: `Gₙ = Aₙ ∪ Bₙ` joined at their distinguished vertices.
pub fn basilica_recursive_graph(n: usize) -> SchreierGraph {
    let mut builder = Builder {
        a: Vec::new(),
        b: Vec::new(),
    };
    let root = builder.vertex();
    builder.attach_a(n, root);
    builder.attach_b(n, root);
    SchreierGraph {
        level: n,
        degree: 2,
        labels: vec!["a".into(), "b".into()],
        targets: vec![builder.a, builder.b],
        root,
    }
}

struct Builder {
    a: Vec<u32>,
    b: Vec<u32>,
}

impl Builder {
    fn vertex(&mut self) -> u32 {
        let v = self.a.len() as u32;
        self.a.push(v);
        self.b.push(v);
        v
    }

    /// Glues a copy of `Aₘ` to `at` by its distinguished vertex.
    fn attach_a(&mut self, m: usize, at: u32) {
        if m.is_multiple_of(2) {
            // A₀ is an a-loop (already present); A_{2k} = A_{2k−1}
            if m > 0 {
                self.attach_a(m - 1, at);
            }
            return;
        }
        // A_{2k+1}: a-labelled 2^{k+1}-gon, B_{2j} at vᵢ where 2^j ‖ i
        let k = (m - 1) / 2;
        self.polygon(1 << (k + 1), at, true, |i| 2 * i.trailing_zeros() as usize);
    }

    /// Glues a copy of `Bₘ` to `at` by its distinguished vertex.
    fn attach_b(&mut self, m: usize, at: u32) {
        if m % 2 == 1 || m == 0 {
            // B₀ is a b-loop; B_{2k+1} = B_{2k}
            if m > 0 {
                self.attach_b(m - 1, at);
            }
            return;
        }
        // B_{2k}: b-labelled 2^k-gon, A_{2j+1} at vᵢ where 2^j ‖ i
        let k = m / 2;
        self.polygon(1 << k, at, false, |i| 2 * i.trailing_zeros() as usize + 1);
    }

    fn polygon(&mut self, len: usize, at: u32, label_a: bool, part: impl Fn(usize) -> usize) {
        let mut cycle = vec![at];
        for i in 1..len {
            let v = self.vertex();
            cycle.push(v);
            if label_a {
                self.attach_b(part(i), v);
            } else {
                self.attach_a(part(i), v);
            }
        }
        let edges = if label_a { &mut self.a } else { &mut self.b };
        for i in 0..len {
            edges[cycle[i] as usize] = cycle[(i + 1) % len];
        }
    }
}

/// Relabels the vertices in breadth-first order from the root, following each
/// label forwards then backwards. Returns `None` if the root does not reach
/// every vertex.
fn canonical_form(g: &SchreierGraph) -> Option<Vec<Vec<u32>>> {
    let size = g.vertex_count();
    let inverses: Vec<Vec<u32>> = g
        .targets
        .iter()
        .map(|t| {
            let mut inv = vec![0u32; size];
            for (v, &w) in t.iter().enumerate() {
                inv[w as usize] = v as u32;
            }
            inv
        })
        .collect();
    let mut order = vec![u32::MAX; size];
    let mut queue = VecDeque::from([g.root]);
    order[g.root as usize] = 0;
    let mut seen = 1u32;
    let mut sequence = Vec::with_capacity(size);
    while let Some(v) = queue.pop_front() {
        sequence.push(v);
        for table in g.targets.iter().zip(&inverses).flat_map(|(f, b)| [f, b]) {
            let w = table[v as usize];
            if order[w as usize] == u32::MAX {
                order[w as usize] = seen;
                seen += 1;
                queue.push_back(w);
            }
        }
    }
    if sequence.len() != size {
        return None;
    }
    Some(
        g.targets
            .iter()
            .map(|t| {
                sequence
                    .iter()
                    .map(|&v| order[t[v as usize] as usize])
                    .collect()
            })
            .collect(),
    )
}

/// True iff a label- and root-preserving isomorphism exists. Both graphs must
/// be connected; otherwise the answer is false.
pub fn labeled_isomorphic(g1: &SchreierGraph, g2: &SchreierGraph) -> bool {
    if g1.labels != g2.labels || g1.vertex_count() != g2.vertex_count() {
        return false;
    }
    match (canonical_form(g1), canonical_form(g2)) {
        (Some(c1), Some(c2)) => c1 == c2,
        _ => false,
    }
}

/// `(1/2k) Σ (P_s + P_s⁻¹)` over the chosen labels; all labels when `subset` is empty.
pub fn hecke_matrix(g: &SchreierGraph, subset: &[&str]) -> Result<DMatrix<f64>, SpectraError> {
    let chosen: Vec<usize> = if subset.is_empty() {
        (0..g.labels.len()).collect()
    } else {
        subset
            .iter()
            .map(|name| {
                g.labels
                    .iter()
                    .position(|l| l == name)
                    .ok_or_else(|| SpectraError::UnknownLabel(name.to_string()))
            })
            .collect::<Result<_, _>>()?
    };
    let size = g.vertex_count();
    if size > MAX_EIGEN_SIZE {
        return Err(SpectraError::Budget {
            what: "matrix",
            size,
            limit: MAX_EIGEN_SIZE,
        });
    }
    let mut m = DMatrix::zeros(size, size);
    let weight = 1.0 / (2 * chosen.len().max(1)) as f64;
    for &l in &chosen {
        for (v, &w) in g.targets[l].iter().enumerate() {
            m[(v, w as usize)] += weight;
            m[(w as usize, v)] += weight;
        }
    }
    if chosen.is_empty() {
        m.fill_with_identity();
    }
    Ok(m)
}

/// All eigenvalues of a symmetric matrix in ascending order, each checked
/// against its eigenvector's residual.
pub fn eigenvalues(m: &DMatrix<f64>) -> Result<Vec<f64>, SpectraError> {
    if m.nrows() > MAX_EIGEN_SIZE {
        return Err(SpectraError::Budget {
            what: "matrix",
            size: m.nrows(),
            limit: MAX_EIGEN_SIZE,
        });
    }
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    let eig = SymmetricEigen::new(m.clone());
    let norm = m.norm().max(f64::MIN_POSITIVE);
    let residual = (m * &eig.eigenvectors
        - &eig.eigenvectors * DMatrix::from_diagonal(&eig.eigenvalues))
    .column_iter()
    .map(|c| c.norm())
    .fold(0.0, f64::max);
    if residual > EIGEN_RESIDUAL * norm {
        return Err(SpectraError::Convergence {
            residual: residual / norm,
        });
    }
    let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// Eigenvalues only, without the residual certificate.
fn eigenvalues_unchecked(m: DMatrix<f64>) -> Vec<f64> {
    let mut values: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(f64::total_cmp);
    values
}

/// Spectrum of the Hecke operator of a binary-alphabet group on level `n`,
/// computed level by level: functions lifted from level `m−1` form an
/// invariant subspace, and on its complement, spanned by `δ_{w𝟏} − δ_{w𝟐}`,
/// each generator acts as a signed permutation of size `2^{m−1}`.
pub fn level_spectrum(t: &Transducer, n: usize) -> Result<Vec<f64>, SpectraError> {
    assert_eq!(
        t.alphabet_size(),
        2,
        "level_spectrum needs a binary alphabet"
    );
    if n > 0 && 1usize << (n - 1) > MAX_EIGEN_SIZE {
        return Err(SpectraError::Budget {
            what: "matrix",
            size: 1 << (n - 1),
            limit: MAX_EIGEN_SIZE,
        });
    }
    let gens = t.primary_generators();
    let weight = 1.0 / (2 * gens.len().max(1)) as f64;
    let mut values = vec![1.0];
    for m in 1..=n {
        let action = LevelAction::new(t, m);
        let size = 1usize << (m - 1);
        let mut c = DMatrix::zeros(size, size);
        for &q in &gens {
            let perm = action.generator(SignedState::positive(q));
            for w in 0..size {
                let image = perm[w << 1] as usize;
                let sign = if image & 1 == 0 { 1.0 } else { -1.0 };
                c[(w, image >> 1)] += weight * sign;
                c[(image >> 1, w)] += weight * sign;
            }
        }
        values.extend(eigenvalues_unchecked(c));
    }
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// A point `(λ, μ, ν)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpectralPoint {
    pub lambda: f64,
    pub mu: f64,
    pub nu: f64,
}

impl SpectralPoint {
    pub fn new(lambda: f64, mu: f64, nu: f64) -> Self {
        SpectralPoint { lambda, mu, nu }
    }

    pub fn max_abs(&self) -> f64 {
        self.lambda.abs().max(self.mu.abs()).max(self.nu.abs())
    }
}

/// `F(λ,μ,ν) = (λ²+2λν−2μ², λν+2ν², −μ²)`.
pub fn f_map(p: SpectralPoint) -> SpectralPoint {
    let SpectralPoint {
        lambda: l,
        mu: m,
        nu: v,
    } = p;
    SpectralPoint::new(
        l * l + 2.0 * l * v - 2.0 * m * m,
        l * v + 2.0 * v * v,
        -m * m,
    )
}

/// `F^k(p)`.
pub fn f_iterate(p: SpectralPoint, k: usize) -> SpectralPoint {
    (0..k).fold(p, |q, _| f_map(q))
}

/// `Q₀ = λ+2μ+2ν`, `Q₁ = Q₀·(λ−2μ+2ν)` and `Qₙ = Q₁∘F^{n−1}`. Overflow shows
/// up as an infinite value.
pub fn q_eval(n: usize, p: SpectralPoint) -> f64 {
    let q0 = |p: SpectralPoint| p.lambda + 2.0 * p.mu + 2.0 * p.nu;
    let q1 = |p: SpectralPoint| q0(p) * (p.lambda - 2.0 * p.mu + 2.0 * p.nu);
    match n {
        0 => q0(p),
        _ => q1(f_iterate(p, n - 1)),
    }
}

/// The matrices `aₙ, bₙ` from `a₀ = b₀ = (1)`, `a_{n+1} = ((0,bₙ),(1,0))`,
/// `b_{n+1} = ((aₙ,0),(0,1))`.
pub fn block_matrices(n: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let mut a = DMatrix::from_element(1, 1, 1.0);
    let mut b = a.clone();
    for _ in 0..n {
        let s = a.nrows();
        let mut a2 = DMatrix::zeros(2 * s, 2 * s);
        let mut b2 = DMatrix::zeros(2 * s, 2 * s);
        a2.view_mut((0, s), (s, s)).copy_from(&b);
        a2.view_mut((s, 0), (s, s)).fill_with_identity();
        b2.view_mut((0, 0), (s, s)).copy_from(&a);
        b2.view_mut((s, s), (s, s)).fill_with_identity();
        a = a2;
        b = b2;
    }
    (a, b)
}

/// `det(λ + μ(aₙ+aₙ⁻¹) + ν(bₙ+bₙ⁻¹))` for the block matrices.
pub fn q_det(n: usize, p: SpectralPoint) -> f64 {
    let (a, b) = block_matrices(n);
    det_with(&a, &b, p)
}

fn det_with(a: &DMatrix<f64>, b: &DMatrix<f64>, p: SpectralPoint) -> f64 {
    let size = a.nrows();
    let m = DMatrix::identity(size, size) * p.lambda
        + (a + a.transpose()) * p.mu
        + (b + b.transpose()) * p.nu;
    m.determinant()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DetRecursionReport {
    pub samples: usize,
    pub nmax: usize,
    pub tol: f64,
    pub max_relative_error: f64,
    /// largest error of the closed form `Q₁∘F^{n−1}` against the determinant
    pub max_closed_form_error: f64,
    pub pass: bool,
}

fn relative(x: f64, y: f64) -> f64 {
    let scale = x.abs().max(y.abs());
    if scale == 0.0 {
        0.0
    } else {
        (x - y).abs() / scale
    }
}

/// Compares `Q_{n+1}(p)` with `Qₙ(F(p))`, both as block determinants, for
/// `samples` points drawn uniformly from `[−1,1]³` and `0 ≤ n ≤ nmax`.
pub fn verify_det_recursion(
    samples: usize,
    nmax: usize,
    tol: f64,
    seed: u64,
) -> DetRecursionReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mats: Vec<_> = (0..=nmax + 1).map(block_matrices).collect();
    let mut max_err: f64 = 0.0;
    let mut max_closed: f64 = 0.0;
    for _ in 0..samples {
        let p = SpectralPoint::new(
            rng.random_range(-1.0..=1.0),
            rng.random_range(-1.0..=1.0),
            rng.random_range(-1.0..=1.0),
        );
        for n in 0..=nmax {
            let lhs = det_with(&mats[n + 1].0, &mats[n + 1].1, p);
            let rhs = det_with(&mats[n].0, &mats[n].1, f_map(p));
            max_err = max_err.max(relative(lhs, rhs));
            max_closed = max_closed.max(relative(lhs, q_eval(n + 1, p)));
        }
    }
    DetRecursionReport {
        samples,
        nmax,
        tol,
        max_relative_error: max_err,
        max_closed_form_error: max_closed,
        pass: max_err < tol,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumReport {
    pub level: usize,
    pub tol: f64,
    pub eigenvalues: Vec<f64>,
    /// largest `|Qₙ(λ,−¼,−¼)| / (1+‖F^{n−1}(p)‖∞)²`
    pub max_scaled_residual: f64,
    /// largest `|ln|Qₙ(x,−¼,−¼)| − Σ ln|x−λᵢ||` over probe points `x` off the
    /// spectrum; small iff the eigenvalues are the roots of `Qₙ(·,−¼,−¼)` with
    /// multiplicity, since both sides are monic of degree `2ⁿ`
    pub charpoly_log_error: f64,
    pub in_range: bool,
    pub top: f64,
    pub top_is_simple: bool,
    pub pass: bool,
}

/// Scaled root condition of `λ` for `Qₙ(·,−¼,−¼)`.
pub fn scaled_root_residual(n: usize, lambda: f64) -> f64 {
    let p = SpectralPoint::new(lambda, -0.25, -0.25);
    let scale = 1.0 + f_iterate(p, n.saturating_sub(1)).max_abs();
    q_eval(n, p).abs() / (scale * scale)
}

/// `ln|Qₙ(p)|`, computed on the sup-norm-normalized orbit so that neither
/// the doubly exponential growth nor the decay of `Qₙ` leaves the float range.
pub fn log_abs_q(n: usize, p: SpectralPoint) -> f64 {
    let mut scale = p.max_abs();
    if scale == 0.0 {
        return f64::NEG_INFINITY;
    }
    let mut log_s = scale.ln();
    let mut q = SpectralPoint::new(p.lambda / scale, p.mu / scale, p.nu / scale);
    for _ in 1..n {
        let next = f_map(q);
        scale = next.max_abs();
        if scale == 0.0 {
            return f64::NEG_INFINITY;
        }
        log_s = 2.0 * log_s + scale.ln();
        q = SpectralPoint::new(next.lambda / scale, next.mu / scale, next.nu / scale);
    }
    let degree = if n == 0 { 1.0 } else { 2.0 };
    degree * log_s + q_eval(n.min(1), q).abs().ln()
}

/// Points off the spectrum where the characteristic polynomial is compared.
const PROBES: [f64; 8] = [-3.0, -2.0, -1.5, -1.1, 1.1, 1.5, 2.0, 3.0];

/// Checks every Hecke eigenvalue of the basilica Schreier graph on level `n`
/// against the root condition of `Qₙ(·,−¼,−¼)`.
pub fn spectrum_check(n: usize, tol: f64) -> Result<SpectrumReport, SpectraError> {
    let t = builtin("gamma", None).expect("builtin");
    let values = eigenvalues(&hecke_matrix(&schreier_graph(&t, n)?, &[])?)?;
    let max_scaled_residual = values
        .iter()
        .map(|&l| scaled_root_residual(n, l))
        .fold(0.0, f64::max);
    let charpoly_log_error = PROBES
        .iter()
        .map(|&x| {
            let product: f64 = values.iter().map(|&l| (x - l).abs().ln()).sum();
            (log_abs_q(n, SpectralPoint::new(x, -0.25, -0.25)) - product).abs()
        })
        .fold(0.0, f64::max);
    let in_range = values
        .iter()
        .all(|&l| (-1.0 - 1e-12..=1.0 + 1e-12).contains(&l));
    let top = *values.last().expect("non-empty spectrum");
    let top_is_simple = values.len() < 2 || values[values.len() - 2] < top - 1e-8;
    let pass = max_scaled_residual <= tol
        && charpoly_log_error <= tol
        && in_range
        && (top - 1.0).abs() < 1e-10
        && top_is_simple;
    Ok(SpectrumReport {
        level: n,
        tol,
        eigenvalues: values,
        max_scaled_residual,
        charpoly_log_error,
        in_range,
        top,
        top_is_simple,
        pass,
    })
}

/// Distinct points of the level-`depth` approximation to the spectrum on the
/// line `μ = ν = −¼`: the roots of `Q_depth(·,−¼,−¼)`, which are the Hecke
/// eigenvalues of the level graph. Points closer than `1e−9` are merged.
pub fn cantor_approximation(depth: usize) -> Result<Vec<f64>, SpectraError> {
    let t = builtin("gamma", None).expect("builtin");
    let values = level_spectrum(&t, depth)?;
    let mut points: Vec<f64> = Vec::with_capacity(values.len());
    for v in values {
        match points.last() {
            Some(&last) if v - last < 1e-9 => {}
            _ => points.push(v),
        }
    }
    Ok(points)
}

/// DOT text with one labelled edge per generator action, loops included.
pub fn to_dot(g: &SchreierGraph) -> String {
    let mut out = String::from("digraph schreier {\n");
    let _ = writeln!(out, "  \"{}\" [shape=doublecircle];", g.vertex_name(g.root));
    for (label, targets) in g.labels.iter().zip(&g.targets) {
        for (v, &w) in targets.iter().enumerate() {
            let _ = writeln!(
                out,
                "  \"{}\" -> \"{}\" [label=\"{}\"];",
                g.vertex_name(v as u32),
                g.vertex_name(w),
                label
            );
        }
    }
    out.push_str("}\n");
    out
}

#[derive(Serialize)]
struct JsonEdge {
    from: String,
    label: String,
    to: String,
}

#[derive(Serialize)]
struct JsonGraph {
    level: usize,
    vertices: Vec<String>,
    edges: Vec<JsonEdge>,
}

/// `{level, vertices, edges: [{from, label, to}]}`.
pub fn to_json(g: &SchreierGraph) -> serde_json::Value {
    let vertices = (0..g.vertex_count() as u32)
        .map(|v| g.vertex_name(v))
        .collect();
    let edges = g
        .labels
        .iter()
        .zip(&g.targets)
        .flat_map(|(label, targets)| {
            targets.iter().enumerate().map(move |(v, &w)| JsonEdge {
                from: g.vertex_name(v as u32),
                label: label.clone(),
                to: g.vertex_name(w),
            })
        })
        .collect();
    serde_json::to_value(JsonGraph {
        level: g.level,
        vertices,
        edges,
    })
    .expect("serializable")
}

/// One value per line in the shortest form that parses back exactly.
pub fn spectrum_to_csv(values: &[f64]) -> String {
    values
        .iter()
        .map(|&v| format!("{}\n", if v == 0.0 { 0.0 } else { v }))
        .collect()
}

pub fn parse_spectrum_csv(text: &str) -> Result<Vec<f64>, SpectraError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.trim().parse::<f64>().map_err(|e| SpectraError::Parse {
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gamma() -> Transducer {
        builtin("gamma", None).unwrap()
    }

    #[test]
    fn level_one_graph() {
        let g = schreier_graph(&gamma(), 1).unwrap();
        assert_eq!(g.labels, ["a", "b"]);
        assert_eq!(g.targets, vec![vec![1, 0], vec![0, 1]]);
        let g0 = schreier_graph(&gamma(), 0).unwrap();
        assert_eq!(g0.vertex_count(), 1);
        assert_eq!(g0.vertex_degree(0), 4);
    }

    #[test]
    fn recursive_graph_matches_direct() {
        for n in 0..=8 {
            let direct = schreier_graph(&gamma(), n).unwrap();
            let recursive = basilica_recursive_graph(n);
            assert_eq!(recursive.vertex_count(), 1 << n);
            assert!(labeled_isomorphic(&direct, &recursive), "n = {n}");
        }
    }

    #[test]
    fn non_isomorphic_graphs() {
        let g = schreier_graph(&gamma(), 2).unwrap();
        let h = schreier_graph(&builtin("grigorchuk", None).unwrap(), 2).unwrap();
        assert!(labeled_isomorphic(&g, &g));
        assert!(!labeled_isomorphic(&g, &h));
        let g3 = schreier_graph(&gamma(), 3).unwrap();
        let mut moved = g3.clone();
        moved.root = (0..8).find(|&v| g3.targets[1][v as usize] == v).unwrap();
        assert!(!labeled_isomorphic(&g3, &moved));
    }

    #[test]
    fn hecke_level_one() {
        let m = hecke_matrix(&schreier_graph(&gamma(), 1).unwrap(), &[]).unwrap();
        assert_eq!(m, DMatrix::from_row_slice(2, 2, &[0.5, 0.5, 0.5, 0.5]));
        let values = eigenvalues(&m).unwrap();
        assert!(values[0].abs() < 1e-15 && (values[1] - 1.0).abs() < 1e-15);
        let m0 = hecke_matrix(&schreier_graph(&gamma(), 0).unwrap(), &[]).unwrap();
        assert_eq!(m0, DMatrix::from_element(1, 1, 1.0));
    }

    #[test]
    fn hecke_rows_sum_to_one() {
        let m = hecke_matrix(&schreier_graph(&gamma(), 5).unwrap(), &[]).unwrap();
        for r in m.row_iter() {
            assert!((r.sum() - 1.0).abs() < 1e-12);
        }
        let only_a = hecke_matrix(&schreier_graph(&gamma(), 2).unwrap(), &["a"]).unwrap();
        assert!((only_a.row(0).sum() - 1.0).abs() < 1e-12);
        assert!(hecke_matrix(&schreier_graph(&gamma(), 2).unwrap(), &["z"]).is_err());
    }

    #[test]
    fn level_spectrum_matches_dense() {
        for n in 0..=6 {
            let dense =
                eigenvalues(&hecke_matrix(&schreier_graph(&gamma(), n).unwrap(), &[]).unwrap())
                    .unwrap();
            let split = level_spectrum(&gamma(), n).unwrap();
            assert_eq!(dense.len(), split.len());
            for (x, y) in dense.iter().zip(&split) {
                assert!((x - y).abs() < 1e-10, "n = {n}");
            }
        }
    }

    #[test]
    fn f_map_values() {
        let p = f_map(SpectralPoint::new(1.0, -0.25, -0.25));
        assert_eq!(p, SpectralPoint::new(0.375, -0.125, -0.0625));
        assert_eq!(
            f_map(SpectralPoint::new(0.0, 0.0, 0.0)),
            SpectralPoint::new(0.0, 0.0, 0.0)
        );
        let q = SpectralPoint::new(0.3, -0.7, 0.2);
        let (f1, f2) = (f_map(q), f_map(SpectralPoint::new(0.6, -1.4, 0.4)));
        assert!((f2.lambda - 4.0 * f1.lambda).abs() < 1e-12);
        assert!((f2.mu - 4.0 * f1.mu).abs() < 1e-12);
        assert!((f2.nu - 4.0 * f1.nu).abs() < 1e-12);
    }

    #[test]
    fn q_closed_forms() {
        assert_eq!(q_eval(0, SpectralPoint::new(1.0, -0.25, -0.25)), 0.0);
        assert_eq!(q_eval(1, SpectralPoint::new(0.0, -0.25, -0.25)), 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let p = SpectralPoint::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            );
            let (l, m, v) = (p.lambda, p.mu, p.nu);
            let det2 = (l + 2.0 * v) * (l + 2.0 * v) - 4.0 * m * m;
            assert!((q_eval(1, p) - det2).abs() < 1e-12);
            assert!((q_det(1, p) - det2).abs() < 1e-12);
        }
    }

    #[test]
    fn det_recursion_holds() {
        let r = verify_det_recursion(20, 4, 1e-8, 1);
        assert!(r.pass, "{r:?}");
        assert!(r.max_closed_form_error < 1e-8);
        assert_eq!(q_det(3, SpectralPoint::new(0.0, 0.0, 0.0)), 0.0);
    }

    #[test]
    fn spectrum_small_levels() {
        for n in 0..=6 {
            let r = spectrum_check(n, 1e-6).unwrap();
            assert!(r.pass, "{r:?}");
        }
    }

    #[test]
    fn charpoly_detects_wrong_roots() {
        let mut values = spectrum_check(5, 1e-6).unwrap().eigenvalues;
        let probe = |v: &[f64]| {
            let product: f64 = v.iter().map(|&l| (2.0 - l).abs().ln()).sum();
            (log_abs_q(5, SpectralPoint::new(2.0, -0.25, -0.25)) - product).abs()
        };
        assert!(probe(&values) < 1e-12);
        values[7] += 1e-3;
        assert!(probe(&values) > 1e-5);
        let p = SpectralPoint::new(0.3, -0.25, -0.25);
        assert!((log_abs_q(4, p) - q_eval(4, p).abs().ln()).abs() < 1e-12);
    }

    #[test]
    fn cantor_points() {
        let one = cantor_approximation(1).unwrap();
        assert!(one[0].abs() < 1e-12 && (one[1] - 1.0).abs() < 1e-12 && one.len() == 2);
        let six = cantor_approximation(6).unwrap();
        assert!(six.iter().all(|x| (-1.0..=1.0 + 1e-12).contains(x)));
        for &l in &spectrum_check(6, 1e-6).unwrap().eigenvalues {
            assert!(six.iter().any(|p| (p - l).abs() < 1e-6));
        }
    }

    #[test]
    fn exports() {
        let g = schreier_graph(&gamma(), 1).unwrap();
        let dot = to_dot(&g);
        assert!(dot.contains("\"1\" -> \"2\" [label=\"a\"]"));
        assert!(dot.contains("\"2\" -> \"2\" [label=\"b\"]"));
        let json = to_json(&g);
        assert_eq!(json["vertices"], serde_json::json!(["1", "2"]));
        assert_eq!(json["edges"].as_array().unwrap().len(), 4);
        let values = vec![-0.123456789012345, 0.0, 1.0 / 3.0, 1.0];
        assert_eq!(
            parse_spectrum_csv(&spectrum_to_csv(&values)).unwrap(),
            values
        );
        assert!(parse_spectrum_csv("x\n").is_err());
    }
}
