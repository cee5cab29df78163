//! Commuting operators from concomitant vanishing: build a basis of formally
//! bisymmetric Fourier pairs, impose the edge conditions, and extract the
//! nonconstant solution of minimum order.

use nalgebra::{DMatrix, DVector};

use crate::darboux::{HermiteMatrixFamily, LaguerreDarboux, SolitonFamily};
use crate::darboux::hermite_matrix::{skew_units, symmetric_units};
use crate::error::{Error, Result};
use crate::expr::ScalarExpr;
use crate::families::{Bispectral, ClassicalKind, ClassicalTriple, FourierPair};
use crate::operators::canonical::{
    symmetric_form_diff_unchecked, symmetric_form_shift_unchecked,
};
use crate::concomitant::{concomitant_vanishing_conditions, Boundary};
use crate::operators::DifferentialOperator;

/// Relative singular-value threshold for null spaces.
pub const NULL_TOL: f64 = 1e-10;
/// Relative threshold for numeric rank of feature matrices.
pub const RANK_TOL: f64 = 1e-8;
const ROW_DROP_TOL: f64 = 1e-11;
/// Relative singular-value floor of the in-window feature map.
const BASIS_TOL: f64 = 1e-9;

/// The supported families.
#[derive(Debug, Clone)]
pub enum Family {
    Classical(ClassicalTriple),
    LaguerreDarboux(LaguerreDarboux),
    HermiteMatrix(HermiteMatrixFamily),
    Soliton(SolitonFamily),
}

/// A boundary point where a concomitant must vanish.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Edge {
    Discrete(i64),
    Continuous(f64),
}

/// Index window `{k_lo..=k_hi}`, interval `(x_lo, x_hi)` and the edges that
/// carry conditions (the others vanish automatically).
#[derive(Debug, Clone, PartialEq)]
pub struct BandWindow {
    pub k_lo: i64,
    pub k_hi: i64,
    pub x_lo: f64,
    pub x_hi: f64,
    pub edges: Vec<Edge>,
}

impl Family {
    pub fn bispectral(&self) -> &dyn Bispectral {
        match self {
            Family::Classical(f) => f,
            Family::LaguerreDarboux(f) => f,
            Family::HermiteMatrix(f) => f,
            Family::Soliton(f) => f,
        }
    }

    pub fn name(&self) -> String {
        self.bispectral().name()
    }

    pub fn size(&self) -> usize {
        self.bispectral().size()
    }

    /// Time-band window. For the soliton family `index_edge` is the first index
    /// `p` of `{p..N}` and the interval is `(t, ∞)`; otherwise it is `n` with
    /// window `{0..n}` and interval `(x0, t)`.
    pub fn band(&self, index_edge: i64, t: f64) -> Result<BandWindow> {
        let (lo, hi) = self.bispectral().support();
        if !(t > lo && t < hi) {
            return Err(Error::domain(format!("band edge must lie inside ({lo}, {hi})"), t));
        }
        match self {
            Family::Soliton(s) => {
                let nsol = s.nsol as i64;
                if index_edge < 1 || index_edge > nsol {
                    return Err(Error::Construction(format!(
                        "soliton window start p must satisfy 1 ≤ p ≤ N = {nsol}, got {index_edge}"
                    )));
                }
                Ok(BandWindow {
                    k_lo: index_edge,
                    k_hi: nsol,
                    x_lo: t,
                    x_hi: hi,
                    edges: vec![Edge::Discrete(index_edge - 1), Edge::Continuous(t)],
                })
            }
            _ => {
                if index_edge < 0 {
                    return Err(Error::Construction(format!("window end n must be ≥ 0, got {index_edge}")));
                }
                Ok(BandWindow {
                    k_lo: 0,
                    k_hi: index_edge,
                    x_lo: lo,
                    x_hi: t,
                    edges: vec![Edge::Discrete(index_edge), Edge::Continuous(t)],
                })
            }
        }
    }

    /// Indices used to sample shift-side coefficients.
    pub fn sample_indices(&self, window: Option<&BandWindow>) -> Vec<i64> {
        let top = match self {
            Family::Soliton(s) => s.nsol as i64 + 2,
            _ => 16.max(window.map_or(0, |w| w.k_hi + 6)),
        };
        (0..=top).collect()
    }

    pub fn sample_points(&self) -> Vec<f64> {
        self.bispectral().sample_points(11)
    }
}

/// One labelled bisymmetric pair.
#[derive(Debug, Clone)]
pub struct BasisElement {
    pub label: String,
    pub pair: FourierPair,
}

#[derive(Debug, Clone)]
pub struct SymmetricPairBasis {
    pub elements: Vec<BasisElement>,
    /// Bandwidth bound (twice the shift radius).
    pub bw_bound: usize,
    pub ord_bound: usize,
}

impl SymmetricPairBasis {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn labels(&self) -> Vec<String> {
        self.elements.iter().map(|e| e.label.clone()).collect()
    }

    pub fn combination(&self, c: &[f64]) -> Result<FourierPair> {
        let terms: Vec<(f64, &FourierPair)> =
            c.iter().zip(&self.elements).map(|(c, e)| (*c, &e.pair)).collect();
        FourierPair::linear_combination(&terms)
    }
}

fn labelled(v: Vec<(String, FourierPair)>) -> Vec<BasisElement> {
    v.into_iter().map(|(label, pair)| BasisElement { label, pair }).collect()
}

/// The scalar generators `I, (λ, D), (L, x), ({L, λ}, {D, x})` of a classical family.
pub fn classical_generators(f: &ClassicalTriple) -> Result<Vec<(String, FourierPair)>> {
    let n = f.size();
    let x = f.x_pair();
    let d = f.lambda_pair();
    Ok(vec![
        ("I".into(), FourierPair::identity(n)),
        ("(λ, D)".into(), d.clone()),
        ("(L, x)".into(), x.clone()),
        ("({L,λ}, {D,x})".into(), x.anticommutator(&d)?),
    ])
}

/// Bisymmetric basis used by the solver. For the matrix family the candidates
/// exceed the window and the solver adds the window restriction as constraints.
pub fn build_symmetric_basis(fam: &Family, bw_bound: usize, ord_bound: usize) -> Result<SymmetricPairBasis> {
    let elements = match fam {
        Family::Classical(f) => {
            if f.kind() == ClassicalKind::Monomial {
                return Err(Error::Construction(
                    "the monomial family has no band-limited commuting problem; only its rank is supported".into(),
                ));
            }
            labelled(classical_generators(f)?)
        }
        Family::LaguerreDarboux(f) => {
            let mut v = vec![("I".to_string(), FourierPair::identity(1))];
            v.extend(f.basis_pairs()?);
            labelled(v)
        }
        Family::HermiteMatrix(f) => labelled(f.candidate_pairs()?),
        Family::Soliton(f) => labelled(f.basis_pairs()?),
    };
    Ok(SymmetricPairBasis {
        elements,
        bw_bound,
        ord_bound,
    })
}

/// Spanning candidates for the window rank: constant symmetric (skew) matrices
/// times anticommutators (commutators) of powers of the two generators.
pub fn rank_candidates(fam: &Family, bw_bound: usize, ord_bound: usize) -> Result<Vec<(String, FourierPair)>> {
    match fam {
        Family::Classical(f) => {
            let n = f.size();
            let x = f.x_pair();
            let d = f.lambda_pair();
            let maxi = bw_bound / 2;
            let maxj = ord_bound / 2;
            let mut xp = vec![FourierPair::identity(n)];
            for i in 1..=maxi {
                let next = xp[i - 1].compose(&x)?;
                xp.push(next);
            }
            let mut dp = vec![FourierPair::identity(n)];
            for j in 1..=maxj {
                let next = dp[j - 1].compose(&d)?;
                dp.push(next);
            }
            let mut out = Vec::new();
            for (i, xi) in xp.iter().enumerate() {
                for (j, dj) in dp.iter().enumerate() {
                    let w = xi.anticommutator(dj)?;
                    for (lab, e) in symmetric_units(n) {
                        out.push((format!("{lab}{{L^{i},λ^{j}}}"), FourierPair::constant(&e)?.compose(&w)?));
                    }
                    if i > 0 && j > 0 {
                        let c = xi.commutator(dj)?;
                        for (lab, e) in skew_units(n) {
                            out.push((format!("{lab}[L^{i},λ^{j}]"), FourierPair::constant(&e)?.compose(&c)?));
                        }
                    }
                }
            }
            Ok(out)
        }
        Family::LaguerreDarboux(f) => {
            let mut v = vec![("I".to_string(), FourierPair::identity(1))];
            v.extend(f.basis_pairs()?);
            Ok(v)
        }
        Family::HermiteMatrix(f) => f.candidate_pairs(),
        Family::Soliton(f) => f.basis_pairs(),
    }
}

/// Coefficient samples of a pair: shift diagonals `|j| ≤ rmax` at `ks` and
/// differential coefficients of order `≤ omax` at `xs`, grouped by level.
struct Features {
    /// `shift[j + rmax]` flattened samples of diagonal `j`
    shift: Vec<Vec<f64>>,
    /// `diff[o]` flattened samples of the order-`o` coefficient
    diff: Vec<Vec<f64>>,
}

fn features(pair: &FourierPair, ks: &[i64], xs: &[f64], rmax: usize, omax: usize) -> Result<Features> {
    let r = rmax as i64;
    let mut shift = Vec::with_capacity(2 * rmax + 1);
    for j in -r..=r {
        let mut v = Vec::new();
        for &k in ks {
            v.extend(pair.shift.coeff(j, k)?.iter().copied());
        }
        shift.push(v);
    }
    let mut diff = Vec::with_capacity(omax + 1);
    for o in 0..=omax {
        let c = pair.diff.coeff(o);
        let mut v = Vec::new();
        for &x in xs {
            v.extend(c.eval(x)?.iter().copied());
        }
        diff.push(v);
    }
    Ok(Features { shift, diff })
}

/// Columns are basis elements, rows are feature samples.
fn stack(cols: &[Vec<f64>]) -> DMatrix<f64> {
    let nr = cols.first().map_or(0, |c| c.len());
    DMatrix::from_fn(nr, cols.len(), |i, j| cols[j][i])
}

/// Rows scaled to unit max-norm; rows below `ROW_DROP_TOL` of the global
/// scale are round-off and are dropped.
fn normalize_rows(m: &DMatrix<f64>) -> DMatrix<f64> {
    let global = m.amax();
    let rows: Vec<_> = m
        .row_iter()
        .filter_map(|r| {
            let s = r.amax();
            (s > ROW_DROP_TOL * global).then(|| r / s)
        })
        .collect();
    if rows.is_empty() {
        return DMatrix::zeros(0, m.ncols());
    }
    DMatrix::from_rows(&rows)
}

const SVD_MAX_ITER: usize = 100_000;

/// Singular values and right factor `Vᵀ` (square, `ncols × ncols`) of `m`.
fn right_svd(m: &DMatrix<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let nc = m.ncols();
    let square = if m.nrows() > nc {
        // tall: same right singular data from the triangular factor
        m.clone().qr().r()
    } else if m.nrows() < nc {
        let mut p = DMatrix::zeros(nc, nc);
        p.view_mut((0, 0), (m.nrows(), nc)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = square
        .try_svd(false, true, f64::EPSILON, SVD_MAX_ITER)
        .ok_or_else(|| Error::Solver("SVD did not converge".into()))?;
    let vt = svd.v_t.expect("requested V");
    Ok((svd.singular_values, vt))
}

/// Map `z ↦ u` with `‖Φu‖ = ‖z‖` on the numerically independent part of the basis.
fn feature_coordinates(phi: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (sv, vt) = right_svd(phi)?;
    let smax = sv.max();
    let keep: Vec<usize> = (0..sv.len()).filter(|&i| sv[i] > BASIS_TOL * smax).collect();
    Ok(DMatrix::from_fn(phi.ncols(), keep.len(), |i, j| vt[(keep[j], i)] / sv[keep[j]]))
}

/// Orthonormal basis (columns) of the numerical null space of `m`.
pub fn null_space(m: &DMatrix<f64>, rel_tol: f64) -> Result<DMatrix<f64>> {
    let nc = m.ncols();
    if m.nrows() == 0 || m.amax() == 0.0 {
        return Ok(DMatrix::identity(nc, nc));
    }
    let (sv, vt) = right_svd(m)?;
    let smax = sv.max();
    let keep: Vec<usize> = (0..sv.len()).filter(|&i| sv[i] <= rel_tol * smax).collect();
    Ok(DMatrix::from_fn(nc, keep.len(), |i, j| vt[(keep[j], i)]))
}

/// Numerical rank with singular values above `rel_tol · σ_max`.
pub fn numeric_rank(m: &DMatrix<f64>, rel_tol: f64) -> Result<usize> {
    if m.nrows() == 0 || m.ncols() == 0 || m.amax() == 0.0 {
        return Ok(0);
    }
    let (s, _) = right_svd(m)?;
    let smax = s.max();
    Ok(s.iter().filter(|v| **v > rel_tol * smax).count())
}

/// Orthonormal basis of the column space, keeping singular values above `abs_tol`.
fn range_basis(m: &DMatrix<f64>, abs_tol: f64) -> Result<DMatrix<f64>> {
    if m.ncols() == 0 || m.amax() == 0.0 {
        return Ok(DMatrix::zeros(m.nrows(), 0));
    }
    let svd = m
        .clone()
        .try_svd(true, false, f64::EPSILON, SVD_MAX_ITER)
        .ok_or_else(|| Error::Solver("SVD did not converge".into()))?;
    let u = svd.u.expect("requested U");
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > abs_tol)
        .collect();
    Ok(DMatrix::from_fn(m.nrows(), keep.len(), |i, j| u[(i, keep[j])]))
}

/// Linear edge functionals of every basis element, one row per matrix entry.
fn edge_constraints(
    basis: &SymmetricPairBasis,
    edges: &[Edge],
) -> Result<(Vec<String>, DMatrix<f64>)> {
    let nb = basis.len();
    let n = basis.elements.first().map_or(1, |e| e.pair.size());
    let rmax = basis.elements.iter().map(|e| e.pair.shift.radius()).max().unwrap_or(0);
    let omax = basis.elements.iter().map(|e| e.pair.diff.order()).max().unwrap_or(0);
    let mut labels = Vec::new();
    let mut cols: Vec<Vec<f64>> = vec![Vec::new(); nb];
    for edge in edges {
        match *edge {
            Edge::Discrete(z) => {
                for i in 1..=rmax {
                    for j in 0..i as i64 {
                        for which in ["A", "B"] {
                            for (col, el) in cols.iter_mut().zip(&basis.elements) {
                                let form = symmetric_form_shift_unchecked(&el.pair.shift);
                                let m = if i < form.a.len() {
                                    let s = if which == "A" { &form.a[i] } else { &form.b[i] };
                                    s.eval(z - j)?
                                } else {
                                    DMatrix::zeros(n, n)
                                };
                                col.extend(m.iter().copied());
                            }
                            for e in 0..n * n {
                                labels.push(format!("{which}_{i}({}) entry {e}", z - j));
                            }
                        }
                    }
                }
            }
            Edge::Continuous(x1) => {
                let forms: Vec<_> = basis
                    .elements
                    .iter()
                    .map(|el| symmetric_form_diff_unchecked(&el.pair.diff, omax))
                    .collect::<Result<_>>()?;
                let conds: Vec<Vec<(String, DMatrix<f64>)>> = forms
                    .iter()
                    .map(|f| f.vanishing_conditions(x1))
                    .collect::<Result<_>>()?;
                for (ci, (lab, _)) in conds[0].iter().enumerate() {
                    for (col, c) in cols.iter_mut().zip(&conds) {
                        col.extend(c[ci].1.iter().copied());
                    }
                    for e in 0..n * n {
                        labels.push(format!("{lab} entry {e}"));
                    }
                }
            }
        }
    }
    Ok((labels, stack(&cols)))
}

/// Solution of the commuting problem.
#[derive(Debug, Clone)]
pub struct CommutingReport {
    pub family: String,
    pub n: i64,
    pub t: f64,
    pub window: BandWindow,
    pub labels: Vec<String>,
    /// Coefficients in the basis order of `labels`.
    pub coefficients: Vec<f64>,
    pub pair: FourierPair,
    /// Effective differential order of the solution.
    pub order: usize,
    /// Dimension of the solution space including constants.
    pub null_dim: usize,
    /// Dimension of the constant solutions.
    pub constant_dim: usize,
    /// Dimension of the minimum-order solutions modulo constants.
    pub min_order_dim: usize,
    /// Named vanishing-condition residuals of the solved pair (max-abs entry).
    pub residuals: Vec<(String, f64)>,
    /// Verification defects attached by the caller.
    pub verification: Vec<(String, f64)>,
}

impl CommutingReport {
    pub fn max_residual(&self) -> f64 {
        crate::kernels::worst(self.residuals.iter().map(|r| r.1))
    }

    pub fn coefficient(&self, label: &str) -> Option<f64> {
        self.labels
            .iter()
            .position(|l| l == label)
            .map(|i| self.coefficients[i])
    }
}

/// Solve for the nonconstant commuting pair of minimum order.
pub fn solve_commuting(fam: &Family, n: i64, t: f64) -> Result<CommutingReport> {
    let window = fam.band(n, t)?;
    let (bw, ord) = default_bounds(fam);
    let basis = build_symmetric_basis(fam, bw, ord)?;
    solve_with_basis(fam, &basis, &window, n, t)
}

/// Bandwidth and order bounds used by [`solve_commuting`].
pub fn default_bounds(fam: &Family) -> (usize, usize) {
    match fam {
        Family::HermiteMatrix(_) | Family::LaguerreDarboux(_) => (4, 4),
        _ => (2, 2),
    }
}

/// Negative control: the solved pair with the coefficient of the family's
/// `x`-type basis element (the `β` direction) multiplied by `1 + rel`. For the
/// matrix family the largest nonconstant coefficient is used.
pub fn perturbed_pair(fam: &Family, rep: &CommutingReport, rel: f64) -> Result<FourierPair> {
    let (bw, ord) = default_bounds(fam);
    let basis = build_symmetric_basis(fam, bw, ord)?;
    let idx = match fam {
        Family::Classical(_) => basis.labels().iter().position(|l| l == "(L, x)"),
        Family::Soliton(_) => basis.labels().iter().position(|l| l == "(L, 2sinh x)"),
        Family::LaguerreDarboux(_) => basis.labels().iter().position(|l| l.starts_with("R2 ")),
        Family::HermiteMatrix(_) => (0..basis.len())
            .filter(|&i| basis.elements[i].label != "I")
            .max_by(|&a, &b| rep.coefficients[a].abs().total_cmp(&rep.coefficients[b].abs())),
    }
    .ok_or_else(|| Error::Solver("no control element in the basis".into()))?;
    let c = rep.coefficients[idx];
    rep.pair.add(&basis.elements[idx].pair.scale(rel * c))
}

/// Core solver on an explicit basis and window.
pub fn solve_with_basis(
    fam: &Family,
    basis: &SymmetricPairBasis,
    window: &BandWindow,
    n: i64,
    t: f64,
) -> Result<CommutingReport> {
    let nb = basis.len();
    if nb == 0 {
        return Err(Error::Solver("empty basis".into()));
    }
    let ks = fam.sample_indices(Some(window));
    let xs = fam.sample_points();
    let rmax = basis.elements.iter().map(|e| e.pair.shift.radius()).max().unwrap_or(0);
    let omax = basis.elements.iter().map(|e| e.pair.diff.order()).max().unwrap_or(0);
    let feats: Vec<Features> = basis
        .elements
        .iter()
        .map(|e| features(&e.pair, &ks, &xs, rmax, omax))
        .collect::<Result<_>>()?;

    let rb = basis.bw_bound / 2;
    let ob = basis.ord_bound;
    let in_window: Vec<Vec<f64>> = feats
        .iter()
        .map(|f| {
            let mut v = Vec::new();
            for (j, s) in f.shift.iter().enumerate() {
                if (j as i64 - rmax as i64).unsigned_abs() as usize <= rb {
                    v.extend(s);
                }
            }
            for d in f.diff.iter().take(ob + 1) {
                v.extend(d);
            }
            v
        })
        .collect();
    let out_window: Vec<Vec<f64>> = feats
        .iter()
        .map(|f| {
            let mut v = Vec::new();
            for (j, s) in f.shift.iter().enumerate() {
                if (j as i64 - rmax as i64).unsigned_abs() as usize > rb {
                    v.extend(s);
                }
            }
            for d in f.diff.iter().skip(ob + 1) {
                v.extend(d);
            }
            v
        })
        .collect();

    // column scales
    let scale: Vec<f64> = in_window
        .iter()
        .map(|v| v.iter().fold(0.0f64, |m, x| m.max(x.abs())))
        .collect();
    if scale.iter().any(|s| *s == 0.0) {
        return Err(Error::Solver("a basis element vanishes on the sample grid".into()));
    }
    let unscale = DMatrix::from_diagonal(&DVector::from_iterator(nb, scale.iter().map(|s| 1.0 / s)));

    let (_, edge_rows) = edge_constraints(basis, &window.edges)?;
    let window_rows = stack(&out_window);
    let mut c = DMatrix::zeros(edge_rows.nrows() + window_rows.nrows(), nb);
    if edge_rows.nrows() > 0 {
        c.view_mut((0, 0), (edge_rows.nrows(), nb)).copy_from(&edge_rows);
    }
    if window_rows.nrows() > 0 {
        c.view_mut((edge_rows.nrows(), 0), (window_rows.nrows(), nb))
            .copy_from(&window_rows);
    }
    // coordinates in which the in-window feature map is an isometry
    let coords = feature_coordinates(&normalize_rows(&(stack(&in_window) * &unscale)))?;
    let reduce = |m: &DMatrix<f64>| normalize_rows(&(m * &unscale * &coords));
    let v = null_space(&reduce(&c), NULL_TOL)?;
    let d = v.ncols();

    // constants: differential side an x-independent matrix
    let x_ref = xs[xs.len() / 2];
    let nonconst: Vec<Vec<f64>> = basis
        .elements
        .iter()
        .zip(&feats)
        .map(|(el, f)| -> Result<Vec<f64>> {
            let c0 = el.pair.diff.coeff(0).eval(x_ref)?;
            let mut out = Vec::new();
            for &x in &xs {
                let m = el.pair.diff.coeff(0).eval(x)? - &c0;
                out.extend(m.iter().copied());
            }
            for dd in f.diff.iter().skip(1) {
                out.extend(dd);
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let phi = reduce(&stack(&nonconst));
    let k = null_space(&(&phi * &v), NULL_TOL)?;
    let kd = k.ncols();
    if d <= kd {
        return Err(Error::Solver(format!(
            "no nonconstant solution with bandwidth ≤ {} and order ≤ {}; increase the bounds",
            basis.bw_bound, basis.ord_bound
        )));
    }

    let diff_block = |lo: usize, hi: usize| -> DMatrix<f64> {
        let cols: Vec<Vec<f64>> = feats
            .iter()
            .map(|f| f.diff[lo..hi].iter().flatten().copied().collect())
            .collect();
        reduce(&stack(&cols))
    };
    let project_out_k = |m: &DMatrix<f64>| -> DMatrix<f64> {
        if kd == 0 {
            m.clone()
        } else {
            m - &k * (k.transpose() * m)
        }
    };
    let mut chosen: Option<(usize, DVector<f64>, usize)> = None;
    for o in 0..=omax {
        let h = diff_block(o + 1, omax + 1);
        let m = if h.nrows() == 0 { DMatrix::identity(d, d) } else { null_space(&(&h * &v), NULL_TOL)? };
        // columns of m are orthonormal, so the projected singular values lie in [0, 1]
        let w = range_basis(&project_out_k(&m), 1e-6)?;
        if w.ncols() == 0 {
            continue;
        }
        let y = if w.ncols() == 1 {
            w.column(0).into_owned()
        } else {
            let lead = diff_block(o, o + 1) * &v * &w;
            let (sv, vt) = right_svd(&lead)?;
            let imax = sv.imax();
            &w * vt.row(imax).transpose()
        };
        chosen = Some((o, y, w.ncols()));
        break;
    }
    let (order, y, min_order_dim) = chosen.ok_or_else(|| Error::Solver("no nonconstant solution found".into()))?;
    let mut u = &coords * (&v * y);
    // canonical representative: no component along the constants in coefficient space
    if kd > 0 {
        let kc = range_basis(&(&coords * (&v * &k)), 1e-12)?;
        u -= &kc * (kc.transpose() * &u);
    }
    let mut coeffs: Vec<f64> = (0..nb).map(|i| u[i] / scale[i]).collect();

    // unit max-norm leading coefficient, first nonzero entry positive
    let lead_pair = basis.combination(&coeffs)?;
    let lead = lead_pair.diff.coeff(order).eval(x_ref)?;
    let amax = lead.amax();
    let mut s = if amax > 0.0 { 1.0 / amax } else { 1.0 };
    if let Some(first) = lead.transpose().iter().find(|v| v.abs() > 1e-12 * amax) {
        if *first < 0.0 {
            s = -s;
        }
    }
    coeffs.iter_mut().for_each(|c| *c *= s);
    let pair = basis.combination(&coeffs)?;
    let residuals = solution_residuals(&pair, &window.edges, &ks, &xs)?;
    Ok(CommutingReport {
        family: fam.name(),
        n,
        t,
        window: window.clone(),
        labels: basis.labels(),
        coefficients: coeffs,
        pair,
        order,
        null_dim: d,
        constant_dim: kd,
        min_order_dim,
        residuals,
        verification: Vec::new(),
    })
}

/// Vanishing-condition residuals of a solved pair (symmetry checked first).
pub fn solution_residuals(
    pair: &FourierPair,
    edges: &[Edge],
    ks: &[i64],
    xs: &[f64],
) -> Result<Vec<(String, f64)>> {
    let mut out = Vec::new();
    for e in edges {
        let conds = match *e {
            Edge::Discrete(k1) => concomitant_vanishing_conditions(Boundary::Discrete {
                op: &pair.shift,
                k1,
                samples: ks,
            })?,
            Edge::Continuous(x1) => concomitant_vanishing_conditions(Boundary::Continuous {
                op: &pair.diff,
                x1,
                samples: xs,
            })?,
        };
        out.extend(conds.into_iter().map(|(l, m)| (l, m.amax())));
    }
    Ok(out)
}

/// Closed-form commuting operator of a classical family:
/// `∂(2x+α)p∂ + p′ + (α+2x)q + βx` with `α = −2t`, `β = −(λ(n)+λ(n+1))`.
pub fn classical_closed_form(f: &ClassicalTriple, n: i64, t: f64) -> Result<DifferentialOperator> {
    if f.kind() == ClassicalKind::Monomial {
        return Err(Error::Construction("no closed form for the monomial family".into()));
    }
    let (p, q) = f.pq();
    let alpha = -2.0 * t;
    let beta = -(f.eigenvalue_lambda(n) + f.eigenvalue_lambda(n + 1));
    let lin = ScalarExpr::poly(&[alpha, 2.0]);
    let c2 = lin.clone() * p.clone();
    let c1 = c2.differentiate();
    let c0 = p.differentiate() + lin * q + ScalarExpr::poly(&[0.0, beta]);
    Ok(DifferentialOperator::scalar(f.size(), vec![c0, c1, c2]))
}

/// Relative distance between `a` and the best multiple `s·b` (plus `c·I` when
/// `modulo_constants`), over the coefficient samples at `xs`.
pub fn proportionality_defect(
    a: &DifferentialOperator,
    b: &DifferentialOperator,
    xs: &[f64],
    modulo_constants: bool,
) -> Result<f64> {
    let omax = a.order().max(b.order());
    let n = a.size();
    let mut va = Vec::new();
    let mut vb = Vec::new();
    let mut vi = Vec::new();
    for o in 0..=omax {
        let (ca, cb) = (a.coeff(o), b.coeff(o));
        for &x in xs {
            va.extend(ca.eval(x)?.iter().copied());
            vb.extend(cb.eval(x)?.iter().copied());
            let id: DMatrix<f64> = if o == 0 { DMatrix::identity(n, n) } else { DMatrix::zeros(n, n) };
            vi.extend(id.iter().copied());
        }
    }
    let ya = DVector::from_vec(va);
    let mut cols = vec![DVector::from_vec(vb)];
    if modulo_constants {
        cols.push(DVector::from_vec(vi));
    }
    let m = DMatrix::from_columns(&cols);
    let sol = m
        .clone()
        .svd(true, true)
        .solve(&ya, 1e-14)
        .map_err(|e| Error::Solver(e.to_string()))?;
    let r = &ya - m * sol;
    Ok(r.amax() / ya.amax().max(f64::MIN_POSITIVE))
}

/// Cosine similarity of two coefficient vectors.
pub fn cosine_similarity(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}

/// Solve the Laguerre Darboux problem and compare with the closed-form
/// coefficients `c₁..c₇`. Verification rows: cosine similarity with the
/// closed form at `n` and at `n + 1`.
pub fn darboux_commuting_order4(f: &LaguerreDarboux, n: i64, t: f64) -> Result<CommutingReport> {
    let fam = Family::LaguerreDarboux(f.clone());
    let mut rep = solve_commuting(&fam, n, t)?;
    // basis order is [I, R1..R7]; constants are ignored in the comparison
    let got = rep.coefficients[1..].to_vec();
    for (label, m) in [("c(n)", n), ("c(n+1)", n + 1)] {
        let cos = cosine_similarity(&got, &f.closed_form_coefficients(m, t)).abs();
        rep.verification.push((format!("cosine similarity with closed form {label}"), cos));
    }
    Ok(rep)
}

/// Solve the matrix Hermite problem. Verification row: the largest vanishing-condition
/// residual of the closed form `U*(t−x)U + x·C`, relative to its coefficient scale.
pub fn matrix_commuting_order2(f: &HermiteMatrixFamily, n: i64, t: f64) -> Result<CommutingReport> {
    let fam = Family::HermiteMatrix(f.clone());
    let mut rep = solve_commuting(&fam, n, t)?;
    let closed = f.commuting_pair(n, t)?;
    let ks = fam.sample_indices(Some(&rep.window));
    let xs = fam.sample_points();
    let res = solution_residuals(&closed, &rep.window.edges, &ks, &xs)?;
    let mut scale = 0.0f64;
    for &x in &xs {
        for c in closed.diff.coeff_values(x)? {
            scale = scale.max(c.amax());
        }
    }
    let worst = crate::kernels::worst(res.iter().map(|r| r.1)) / scale.max(f64::MIN_POSITIVE);
    rep.verification.push(("closed-form relative vanishing residual".into(), worst));
    Ok(rep)
}

/// Rank of the span of `candidates` restricted to the bandwidth/order window:
/// the part of the span whose out-of-window coefficients vanish.
pub fn bifiltration_rank(
    candidates: &[FourierPair],
    bw_bound: usize,
    ord_bound: usize,
    ks: &[i64],
    xs: &[f64],
) -> Result<usize> {
    if candidates.is_empty() {
        return Ok(0);
    }
    let rmax = candidates.iter().map(|p| p.shift.radius()).max().unwrap_or(0);
    let omax = candidates.iter().map(|p| p.diff.order()).max().unwrap_or(0);
    let rb = bw_bound / 2;
    let mut inside: Vec<Vec<f64>> = Vec::new();
    let mut outside: Vec<Vec<f64>> = Vec::new();
    for p in candidates {
        let f = features(p, ks, xs, rmax, omax)?;
        let (mut vi, mut vo) = (Vec::new(), Vec::new());
        for (j, s) in f.shift.iter().enumerate() {
            if (j as i64 - rmax as i64).unsigned_abs() as usize <= rb {
                vi.extend(s);
            } else {
                vo.extend(s);
            }
        }
        for (o, d) in f.diff.iter().enumerate() {
            if o <= ord_bound {
                vi.extend(d);
            } else {
                vo.extend(d);
            }
        }
        inside.push(vi);
        outside.push(vo);
    }
    let scale: Vec<f64> = inside
        .iter()
        .zip(&outside)
        .map(|(a, b)| a.iter().chain(b).fold(0.0f64, |m, x| m.max(x.abs())).max(f64::MIN_POSITIVE))
        .collect();
    let unscale = DMatrix::from_diagonal(&DVector::from_iterator(
        candidates.len(),
        scale.iter().map(|s| 1.0 / s),
    ));
    let z = null_space(&normalize_rows(&(stack(&outside) * &unscale)), NULL_TOL)?;
    let fin = normalize_rows(&(stack(&inside) * &unscale));
    numeric_rank(&(fin * z), RANK_TOL)
}

/// Window rank of a family from its spanning candidates.
pub fn family_window_rank(fam: &Family, bw_bound: usize, ord_bound: usize) -> Result<usize> {
    if let Family::Classical(f) = fam {
        if f.kind() == ClassicalKind::Monomial {
            return Ok(monomial_bisymmetric_rank(f.size(), bw_bound / 2, ord_bound / 2));
        }
    }
    let cands: Vec<FourierPair> = rank_candidates(fam, bw_bound, ord_bound)?
        .into_iter()
        .map(|c| c.1)
        .collect();
    bifiltration_rank(&cands, bw_bound, ord_bound, &fam.sample_indices(None), &fam.sample_points())
}

/// Dimension of the bisymmetric part of the window `|i| ≤ ℓ`, `deg_k ≤ 2m`
/// for `Ψ = xᵏ I_N`, computed from the two commuting adjoint involutions on
/// the word basis `kʲ𝒮ⁱE_ab`.
pub fn monomial_bisymmetric_rank(n: usize, l: usize, m: usize) -> usize {
    let (li, jm) = (l as i64, 2 * m);
    let mut idx = Vec::new();
    for i in -li..=li {
        for j in 0..=jm {
            for a in 0..n {
                for b in 0..n {
                    idx.push((i, j, a, b));
                }
            }
        }
    }
    let pos = |i: i64, j: usize, a: usize, b: usize| -> usize {
        (((i + li) as usize * (jm + 1) + j) * n + a) * n + b
    };
    let dim = idx.len();
    // (k + c)ʲ expanded in powers of k
    let binom_poly = |c: f64, s: f64, j: usize| -> Vec<f64> {
        (0..=j)
            .map(|p| crate::func::binom(j, p) * s.powi(p as i32) * c.powi((j - p) as i32))
            .collect()
    };
    let mut sk = DMatrix::zeros(dim, dim);
    let mut sx = DMatrix::zeros(dim, dim);
    for (col, &(i, j, a, b)) in idx.iter().enumerate() {
        // (kʲ𝒮ⁱE_ab)* = E_ba (k−i)ʲ 𝒮⁻ⁱ
        for (p, c) in binom_poly(-(i as f64), 1.0, j).into_iter().enumerate() {
            sk[(pos(-i, p, b, a), col)] += c;
        }
        // x-side adjoint: E_ba (−k−i−1)ʲ 𝒮ⁱ
        for (p, c) in binom_poly(-(i as f64) - 1.0, -1.0, j).into_iter().enumerate() {
            sx[(pos(i, p, b, a), col)] += c;
        }
    }
    let id = DMatrix::<f64>::identity(dim, dim);
    let proj = (&id + sk) * (&id + sx) / 4.0;
    numeric_rank(&proj, 1e-9).expect("SVD of a small projector matrix")
}

/// `(ℓ+1)(m+1)N² − (ℓ+m+1)N(N−1)/2`, the bisymmetric window dimension of the monomial family.
pub fn monomial_rank_formula(n: usize, l: usize, m: usize) -> usize {
    (l + 1) * (m + 1) * n * n - (l + m + 1) * n * (n - 1) / 2
}

/// Target lower bound `13N²/2 + 3N/2` for the matrix family in the `(4,4)` window.
pub fn matrix_family_rank_bound(n: usize) -> usize {
    (13 * n * n + 3 * n) / 2
}

/// Closed-form soliton parameters `(β, γ)` read off a solved report.
pub fn soliton_parameters(rep: &CommutingReport) -> Option<(f64, f64)> {
    let anti = rep.coefficient("{k², L}")?;
    let l = rep.coefficient("(L, 2sinh x)")?;
    let d = rep.coefficient("(k², D)")?;
    Some((l / anti, d / anti))
}
