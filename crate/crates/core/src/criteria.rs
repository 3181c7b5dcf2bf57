//! Rank-based tests for output s-sparse controllability and the report that
//! aggregates them.
//!
//! All tests are evaluated from one [`Analysis`], which caches every rank and
//! the spectrum of `A`. The free functions build a fresh analysis per call
//! and exist for one-off queries.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use nalgebra::Complex;

use crate::controllability::{
    controllability_matrix, kalman_decompose, rank_profile_with_form, KalmanForm, RankProfile,
    Ratio,
};
use crate::error::Error;
use crate::matops::{
    complex_numerical_rank, complexify, distinct_eigenvalues, numerical_rank,
    numerical_rank_scaled, spectral_norm, ComplexMatrix, TolerancePolicy,
};
use crate::system::LinearSystem;

/// Precomputed ranks and spectrum of one system.
#[derive(Clone, Debug)]
pub struct Analysis<'a> {
    sys: &'a LinearSystem,
    pol: TolerancePolicy,
    pub form: KalmanForm,
    pub profile: RankProfile,
    pub rank_w: usize,
    pub rank_aw: usize,
    pub rank_a: usize,
    pub rank_c: usize,
    pub rank_ca: usize,
    pub eigenvalues: Vec<Complex<f64>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NecessaryDetail {
    pub holds: bool,
    pub rank_cw: usize,
    pub n: usize,
    pub bound: Ratio,
    pub argmax: usize,
    pub s: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SufficientDetail {
    pub holds: bool,
    pub rank_cw: usize,
    pub n: usize,
    pub max_metric: usize,
    pub argmax: usize,
    /// `min{m, max_i R_i}`
    pub bound: usize,
    pub s: usize,
}

/// Minimum sparsity bracket `lo <= s* <= hi`, both clamped to at least 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SparsityInterval {
    pub lo: usize,
    pub hi: usize,
    /// True when an unclamped bound was 0 and got raised to 1.
    pub clamped: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Corollary1 {
    /// `max_i R_i == R_0`
    pub applies: bool,
    pub output_controllable: bool,
    pub n: usize,
    pub rank_caw: usize,
}

impl Corollary1 {
    /// `rank(CW) = n` and `s >= n - rank(CAW)`.
    pub fn reduced_condition(&self, s: usize) -> bool {
        self.output_controllable && s + self.rank_caw >= self.n
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Corollary2Detail {
    pub holds: bool,
    /// `min{m, N - rank(A)}`
    pub bound: usize,
    /// `rank(W) - rank(AW)`
    pub strict_bound: usize,
    pub strict_holds: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PbhDetail {
    pub holds: bool,
    pub rank_condition: bool,
    pub failing_eigenvalue: Option<Complex<f64>>,
    pub state_dim: usize,
    pub rank_a: usize,
    pub s: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TheoremCDetail {
    pub holds: bool,
    pub rank_c: usize,
    pub eigen_condition: bool,
    pub failing_eigenvalue: Option<Complex<f64>>,
    pub rank_ca: usize,
    pub n: usize,
    pub s: usize,
}

impl<'a> Analysis<'a> {
    pub fn new(sys: &'a LinearSystem, pol: &TolerancePolicy) -> Result<Self, Error> {
        let form = kalman_decompose(sys, pol)?;
        let profile = rank_profile_with_form(sys, &form, pol)?;
        let w = controllability_matrix(sys);
        let norm_a = spectral_norm(sys.a());
        let rank_w = form.rank;
        let rank_aw = numerical_rank_scaled(&(sys.a() * &w), norm_a * spectral_norm(&w), pol);
        let rank_a = numerical_rank(sys.a(), pol);
        let rank_c = numerical_rank(sys.c(), pol);
        let rank_ca =
            numerical_rank_scaled(&(sys.c() * sys.a()), spectral_norm(sys.c()) * norm_a, pol);
        let eigenvalues = distinct_eigenvalues(sys.a(), pol)?;
        Ok(Self {
            sys,
            pol: *pol,
            form,
            profile,
            rank_w,
            rank_aw,
            rank_a,
            rank_c,
            rank_ca,
            eigenvalues,
        })
    }

    pub fn system(&self) -> &LinearSystem {
        self.sys
    }

    pub fn policy(&self) -> &TolerancePolicy {
        &self.pol
    }

    pub fn rank_cw(&self) -> usize {
        self.profile.rank_cw()
    }

    /// Kalman rank test for output controllability: `rank(CW) = n`.
    pub fn output_controllable(&self) -> bool {
        self.rank_cw() == self.sys.output_dim()
    }

    /// `max_i (sum_{j<=i} R_j) / (i+1)`
    pub fn necessary_bound(&self) -> Ratio {
        self.profile.max_average().0
    }

    /// `min{m, max_i R_i}`
    pub fn sufficient_bound(&self) -> usize {
        self.profile.max_metric().0.min(self.sys.input_dim())
    }

    pub fn necessary(&self, s: usize) -> Result<NecessaryDetail, Error> {
        self.sys.check_sparsity(s)?;
        let (bound, argmax) = self.profile.max_average();
        Ok(NecessaryDetail {
            holds: self.output_controllable() && bound.le_int(s),
            rank_cw: self.rank_cw(),
            n: self.sys.output_dim(),
            bound,
            argmax,
            s,
        })
    }

    pub fn sufficient(&self, s: usize) -> Result<SufficientDetail, Error> {
        self.sys.check_sparsity(s)?;
        let (max_metric, argmax) = self.profile.max_metric();
        let bound = max_metric.min(self.sys.input_dim());
        Ok(SufficientDetail {
            holds: self.output_controllable() && bound <= s,
            rank_cw: self.rank_cw(),
            n: self.sys.output_dim(),
            max_metric,
            argmax,
            bound,
            s,
        })
    }

    pub fn minimum_sparsity_interval(&self) -> Option<SparsityInterval> {
        if !self.output_controllable() {
            return None;
        }
        let lo_raw = self.necessary_bound().ceil();
        let hi_raw = self.sufficient_bound();
        Some(SparsityInterval {
            lo: lo_raw.max(1),
            hi: hi_raw.max(1),
            clamped: lo_raw == 0 || hi_raw == 0,
        })
    }

    pub fn corollary1(&self) -> Corollary1 {
        let r0 = self.profile.metric.first().copied().unwrap_or(0);
        Corollary1 {
            applies: self.profile.max_metric().0 == r0,
            output_controllable: self.output_controllable(),
            n: self.sys.output_dim(),
            rank_caw: self.profile.rank_caw(),
        }
    }

    pub fn corollary2(&self, s: usize) -> Result<Corollary2Detail, Error> {
        self.sys.check_sparsity(s)?;
        let bound = self.sys.input_dim().min(self.sys.state_dim() - self.rank_a);
        let strict_bound = self.rank_w - self.rank_aw.min(self.rank_w);
        let oc = self.output_controllable();
        Ok(Corollary2Detail {
            holds: oc && s >= bound,
            bound,
            strict_bound,
            strict_holds: oc && s >= strict_bound,
        })
    }

    fn pencil(&self, lambda: Complex<f64>) -> ComplexMatrix {
        let n = self.sys.state_dim();
        let shifted = ComplexMatrix::identity(n, n) * lambda - complexify(self.sys.a());
        hstack_complex(&shifted, &complexify(self.sys.b()))
    }

    /// PBH test with sparsity: `rank[lambda I - A, B] = N` at every
    /// eigenvalue of `A`, and `N <= rank(A) + s`.
    pub fn pbh_state_sparse(&self, s: usize) -> Result<PbhDetail, Error> {
        self.sys.check_sparsity(s)?;
        let n = self.sys.state_dim();
        let failing = self
            .eigenvalues
            .iter()
            .copied()
            .find(|&lambda| complex_numerical_rank(&self.pencil(lambda), &self.pol) < n);
        let rank_condition = failing.is_none();
        Ok(PbhDetail {
            holds: rank_condition && n <= self.rank_a + s,
            rank_condition,
            failing_eigenvalue: failing,
            state_dim: n,
            rank_a: self.rank_a,
            s,
        })
    }

    /// `rank(C) = n`, `rank(C [lambda I - A, B]) = n` at every eigenvalue of
    /// `A`, and `rank(CA) >= n - s`.
    ///
    /// `rank(C[lambda I - A, B]) < n` needs `z != 0` with `z^T C [lambda I - A, B] = 0`.
    /// Either `C^T z = 0`, which the `rank(C) = n` gate rules out for every
    /// lambda, or `C^T z` is a left eigenvector of `A`, which puts lambda in
    /// the spectrum. Checking the spectrum therefore covers all of C.
    pub fn theorem_c_necessary(&self, s: usize) -> Result<TheoremCDetail, Error> {
        self.sys.check_sparsity(s)?;
        let n = self.sys.output_dim();
        let c = complexify(self.sys.c());
        let failing = if self.rank_c == n {
            self.eigenvalues
                .iter()
                .copied()
                .find(|&lambda| complex_numerical_rank(&(&c * self.pencil(lambda)), &self.pol) < n)
        } else {
            None
        };
        let eigen_condition = self.rank_c == n && failing.is_none();
        Ok(TheoremCDetail {
            holds: eigen_condition && self.rank_ca + s >= n,
            rank_c: self.rank_c,
            eigen_condition,
            failing_eigenvalue: failing,
            rank_ca: self.rank_ca,
            n,
            s,
        })
    }

    pub fn verdict(&self, s: usize) -> Result<SparsityVerdict, Error> {
        let cor1 = self.corollary1();
        let cor2 = self.corollary2(s)?;
        Ok(SparsityVerdict {
            s,
            necessary_holds: self.necessary(s)?.holds,
            sufficient_holds: self.sufficient(s)?.holds,
            corollary1_reduced: cor1.applies.then(|| cor1.reduced_condition(s)),
            corollary2_holds: cor2.holds,
            corollary2_strict_holds: cor2.strict_holds,
            pbh_state_sparse: self.pbh_state_sparse(s)?.holds,
            theorem_c_necessary: self.theorem_c_necessary(s)?.holds,
        })
    }

    pub fn report(&self, s_list: &[usize]) -> Result<ControllabilityReport, Error> {
        let verdicts = s_list
            .iter()
            .map(|&s| self.verdict(s))
            .collect::<Result<Vec<_>, _>>()?;
        let interval = self.minimum_sparsity_interval();
        let (_, necessary_argmax) = self.profile.max_average();
        let (max_metric, sufficient_argmax) = self.profile.max_metric();
        let cor2_bound = self.sys.input_dim().min(self.sys.state_dim() - self.rank_a);
        let report = ControllabilityReport {
            name: self.sys.name().map(String::from),
            n: self.sys.output_dim(),
            state_dim: self.sys.state_dim(),
            m: self.sys.input_dim(),
            rank_cw: self.rank_cw(),
            rank_w: self.rank_w,
            rank_aw: self.rank_aw,
            rank_a: self.rank_a,
            rank_c: self.rank_c,
            rank_ca: self.rank_ca,
            output_controllable: self.output_controllable(),
            ranks: self.profile.ranks.clone(),
            metric: self.profile.metric.clone(),
            max_metric,
            sufficient_argmax,
            necessary_bound: self.necessary_bound(),
            necessary_argmax,
            sufficient_bound: self.sufficient_bound(),
            min_sparsity_lo: interval.map(|i| i.lo),
            min_sparsity_hi: interval.map(|i| i.hi),
            sparsity_clamped: interval.is_some_and(|i| i.clamped),
            corollary1_applies: self.corollary1().applies,
            corollary2_bound: cor2_bound,
            corollary2_strict_bound: self.rank_w - self.rank_aw.min(self.rank_w),
            eigenvalues: self.eigenvalues.iter().map(|z| [z.re, z.im]).collect(),
            verdicts,
            tolerance_used: self.pol,
        };
        report.check_invariants()?;
        Ok(report)
    }
}

fn hstack_complex(left: &ComplexMatrix, right: &ComplexMatrix) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(left.nrows(), left.ncols() + right.ncols());
    out.columns_mut(0, left.ncols()).copy_from(left);
    out.columns_mut(left.ncols(), right.ncols())
        .copy_from(right);
    out
}

/// Every per-sparsity verdict for one `s`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SparsityVerdict {
    pub s: usize,
    pub necessary_holds: bool,
    pub sufficient_holds: bool,
    /// Present only when `max_i R_i = R_0`.
    pub corollary1_reduced: Option<bool>,
    pub corollary2_holds: bool,
    pub corollary2_strict_holds: bool,
    pub pbh_state_sparse: bool,
    #[cfg_attr(feature = "serde", serde(rename = "theoremC_necessary"))]
    pub theorem_c_necessary: bool,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ControllabilityReport {
    pub name: Option<String>,
    pub n: usize,
    #[cfg_attr(feature = "serde", serde(rename = "N"))]
    pub state_dim: usize,
    pub m: usize,
    #[cfg_attr(feature = "serde", serde(rename = "rank_CW"))]
    pub rank_cw: usize,
    #[cfg_attr(feature = "serde", serde(rename = "rank_W"))]
    pub rank_w: usize,
    #[cfg_attr(feature = "serde", serde(rename = "rank_AW"))]
    pub rank_aw: usize,
    #[cfg_attr(feature = "serde", serde(rename = "rank_A"))]
    pub rank_a: usize,
    #[cfg_attr(feature = "serde", serde(rename = "rank_C"))]
    pub rank_c: usize,
    #[cfg_attr(feature = "serde", serde(rename = "rank_CA"))]
    pub rank_ca: usize,
    pub output_controllable: bool,
    /// `rank(C A^i W)`, i = 0..=N
    pub ranks: Vec<usize>,
    /// `R_i`, i = 0..N-1
    pub metric: Vec<usize>,
    pub max_metric: usize,
    pub sufficient_argmax: usize,
    pub necessary_bound: Ratio,
    pub necessary_argmax: usize,
    pub sufficient_bound: usize,
    pub min_sparsity_lo: Option<usize>,
    pub min_sparsity_hi: Option<usize>,
    pub sparsity_clamped: bool,
    pub corollary1_applies: bool,
    pub corollary2_bound: usize,
    pub corollary2_strict_bound: usize,
    /// Distinct eigenvalues of `A` as `[re, im]`.
    pub eigenvalues: Vec<[f64; 2]>,
    pub verdicts: Vec<SparsityVerdict>,
    pub tolerance_used: TolerancePolicy,
}

impl ControllabilityReport {
    pub fn verdict(&self, s: usize) -> Option<&SparsityVerdict> {
        self.verdicts.iter().find(|v| v.s == s)
    }

    pub fn check_invariants(&self) -> Result<(), Error> {
        let fail = |msg: String| Err(Error::ReportInvariant(msg));
        if self.output_controllable && (self.necessary_bound > Ratio::new(self.sufficient_bound, 1))
        {
            return fail(format!(
                "necessary bound {} exceeds sufficient bound {}",
                self.necessary_bound, self.sufficient_bound
            ));
        }
        if let (Some(lo), Some(hi)) = (self.min_sparsity_lo, self.min_sparsity_hi) {
            if lo > hi {
                return fail(format!("minimum sparsity interval [{lo}, {hi}] is empty"));
            }
        }
        for v in &self.verdicts {
            if v.sufficient_holds && !v.necessary_holds {
                return fail(format!(
                    "sufficient holds but necessary fails at s = {}",
                    v.s
                ));
            }
        }
        Ok(())
    }
}

/// Kalman rank test: true iff `rank(CW) = n`.
pub fn check_output_controllable(sys: &LinearSystem, pol: &TolerancePolicy) -> Result<bool, Error> {
    Ok(Analysis::new(sys, pol)?.output_controllable())
}

pub fn necessary_conditions(
    sys: &LinearSystem,
    s: usize,
    pol: &TolerancePolicy,
) -> Result<NecessaryDetail, Error> {
    sys.check_sparsity(s)?;
    Analysis::new(sys, pol)?.necessary(s)
}

pub fn sufficient_conditions(
    sys: &LinearSystem,
    s: usize,
    pol: &TolerancePolicy,
) -> Result<SufficientDetail, Error> {
    sys.check_sparsity(s)?;
    Analysis::new(sys, pol)?.sufficient(s)
}

/// `None` when the system is not output controllable.
pub fn minimum_sparsity_interval(
    sys: &LinearSystem,
    pol: &TolerancePolicy,
) -> Result<Option<SparsityInterval>, Error> {
    Ok(Analysis::new(sys, pol)?.minimum_sparsity_interval())
}

pub fn corollary1_check(sys: &LinearSystem, pol: &TolerancePolicy) -> Result<Corollary1, Error> {
    Ok(Analysis::new(sys, pol)?.corollary1())
}

pub fn corollary2_check(
    sys: &LinearSystem,
    s: usize,
    pol: &TolerancePolicy,
) -> Result<Corollary2Detail, Error> {
    sys.check_sparsity(s)?;
    Analysis::new(sys, pol)?.corollary2(s)
}

pub fn pbh_state_sparse(
    sys: &LinearSystem,
    s: usize,
    pol: &TolerancePolicy,
) -> Result<PbhDetail, Error> {
    sys.check_sparsity(s)?;
    Analysis::new(sys, pol)?.pbh_state_sparse(s)
}

pub fn theorem_c_necessary(
    sys: &LinearSystem,
    s: usize,
    pol: &TolerancePolicy,
) -> Result<TheoremCDetail, Error> {
    sys.check_sparsity(s)?;
    Analysis::new(sys, pol)?.theorem_c_necessary(s)
}

pub fn full_report(
    sys: &LinearSystem,
    s_list: &[usize],
    pol: &TolerancePolicy,
) -> Result<ControllabilityReport, Error> {
    for &s in s_list {
        sys.check_sparsity(s)?;
    }
    Analysis::new(sys, pol)?.report(s_list)
}

/// `rank(C [lambda I - A, B])` at an arbitrary complex point.
pub fn output_pencil_rank(
    sys: &LinearSystem,
    lambda: Complex<f64>,
    pol: &TolerancePolicy,
) -> usize {
    let n = sys.state_dim();
    let shifted = ComplexMatrix::identity(n, n) * lambda - complexify(sys.a());
    let pencil = hstack_complex(&shifted, &complexify(sys.b()));
    complex_numerical_rank(&(complexify(sys.c()) * pencil), pol)
}

/// `rank(C A W)` computed from scratch, independent of the rank profile.
pub fn rank_caw(sys: &LinearSystem, pol: &TolerancePolicy) -> usize {
    let w = controllability_matrix(sys);
    let caw = sys.c() * sys.a() * &w;
    let scale = spectral_norm(sys.c()) * spectral_norm(sys.a()) * spectral_norm(&w);
    numerical_rank_scaled(&caw, scale, pol)
}
