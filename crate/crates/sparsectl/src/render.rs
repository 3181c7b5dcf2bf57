//! Human-readable text output.

use std::fmt::Write;

use sparsectl_core::criteria::Analysis;
use sparsectl_core::{ControllabilityReport, DesignSolution, OracleVerdict, Trajectory, Vector};

fn list<T: ToString>(xs: &[T]) -> String {
    xs.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(" ")
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn mark(b: bool) -> &'static str {
    if b {
        "PASS"
    } else {
        "FAIL"
    }
}

fn complex(z: [f64; 2]) -> String {
    if z[1] == 0.0 {
        format!("{:.6}", z[0])
    } else {
        format!("{:.6}{:+.6}i", z[0], z[1])
    }
}

fn vector(v: &Vector) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.6}")).collect();
    format!("[{}]", parts.join(", "))
}

pub fn report_text(r: &ControllabilityReport) -> String {
    let mut rows: Vec<(&str, String)> = Vec::new();
    if let Some(name) = &r.name {
        rows.push(("system", name.clone()));
    }
    rows.push((
        "dimensions",
        format!("N = {}, m = {}, n = {}", r.state_dim, r.m, r.n),
    ));
    rows.push((
        "rank(CW)",
        format!(
            "{} ({})",
            r.rank_cw,
            if r.output_controllable {
                "output controllable"
            } else {
                "not output controllable"
            }
        ),
    ));
    rows.push(("rank(C A^i W)", list(&r.ranks)));
    rows.push(("R_i", list(&r.metric)));
    rows.push((
        "max R_i",
        format!("{} at i = {}", r.max_metric, r.sufficient_argmax),
    ));
    rows.push((
        "max running mean",
        format!("{} at i = {}", r.necessary_bound, r.necessary_argmax),
    ));
    rows.push(("sufficient bound", r.sufficient_bound.to_string()));
    let interval = match (r.min_sparsity_lo, r.min_sparsity_hi) {
        (Some(lo), Some(hi)) => format!(
            "[{lo}, {hi}]{}",
            if r.sparsity_clamped {
                " (clamped to s >= 1)"
            } else {
                ""
            }
        ),
        _ => "none (not output controllable)".to_string(),
    };
    rows.push(("minimum sparsity", interval));
    rows.push(("max R_i = R_0", yes_no(r.corollary1_applies).to_string()));
    rows.push(("min{m, N - rank(A)}", r.corollary2_bound.to_string()));
    rows.push(("rank(W) - rank(AW)", r.corollary2_strict_bound.to_string()));
    rows.push((
        "ranks W AW A C CA",
        list(&[r.rank_w, r.rank_aw, r.rank_a, r.rank_c, r.rank_ca]),
    ));
    let eig: Vec<String> = r.eigenvalues.iter().map(|&z| complex(z)).collect();
    rows.push(("eigenvalues(A)", eig.join(", ")));
    rows.push((
        "tolerances",
        format!(
            "rank {:e}, residual {:e}",
            r.tolerance_used.relative_rank_tol, r.tolerance_used.residual_tol
        ),
    ));
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    let mut out = String::new();
    for (k, v) in rows {
        let _ = writeln!(out, "{k:<width$}  {v}");
    }
    if !r.verdicts.is_empty() {
        let _ = writeln!(
            out,
            "\n{:>3}  {:<9}  {:<10}  {:<7}  {:<10}  {:<8}  {:<7}  {:<8}",
            "s", "necessary", "sufficient", "reduced", "N-rank(A)", "W-AW", "pbh", "spectral"
        );
        for v in &r.verdicts {
            let reduced = v.corollary1_reduced.map_or("-", yes_no);
            let _ = writeln!(
                out,
                "{:>3}  {:<9}  {:<10}  {:<7}  {:<10}  {:<8}  {:<7}  {:<8}",
                v.s,
                yes_no(v.necessary_holds),
                yes_no(v.sufficient_holds),
                reduced,
                yes_no(v.corollary2_holds),
                yes_no(v.corollary2_strict_holds),
                yes_no(v.pbh_state_sparse),
                yes_no(v.theorem_c_necessary),
            );
        }
    }
    out.lines()
        .map(str::trim_end)
        .collect::<Vec<_>>()
        .join("\n")
        + "\n"
}

/// One PASS/FAIL line per test at sparsity `s`.
pub fn check_lines(an: &Analysis<'_>, s: usize) -> Result<String, sparsectl_core::Error> {
    let nec = an.necessary(s)?;
    let suf = an.sufficient(s)?;
    let c1 = an.corollary1();
    let c2 = an.corollary2(s)?;
    let pbh = an.pbh_state_sparse(s)?;
    let tc = an.theorem_c_necessary(s)?;
    let sys = an.system();
    let n = sys.output_dim();
    let mut lines: Vec<(bool, &str, String)> = vec![
        (
            an.output_controllable(),
            "output rank",
            format!("rank(CW) = {}, n = {n}", an.rank_cw()),
        ),
        (
            nec.holds,
            "necessary",
            format!(
                "max running mean of R_i = {} (i = {}) vs s = {s}",
                nec.bound, nec.argmax
            ),
        ),
        (
            suf.holds,
            "sufficient",
            format!(
                "min{{m, max R_i}} = {} (max at i = {}) vs s = {s}",
                suf.bound, suf.argmax
            ),
        ),
    ];
    if c1.applies {
        lines.push((
            c1.reduced_condition(s),
            "reduced",
            format!(
                "n - rank(CAW) = {} vs s = {s}",
                n.saturating_sub(c1.rank_caw)
            ),
        ));
    }
    lines.push((
        c2.holds,
        "N - rank(A)",
        format!("min{{m, N - rank(A)}} = {} vs s = {s}", c2.bound),
    ));
    lines.push((
        c2.strict_holds,
        "W - AW",
        format!("rank(W) - rank(AW) = {} vs s = {s}", c2.strict_bound),
    ));
    lines.push((
        pbh.holds,
        "state pbh",
        match pbh.failing_eigenvalue {
            Some(z) => format!(
                "rank [lambda I - A, B] < N at lambda = {}",
                complex([z.re, z.im])
            ),
            None => format!("N = {} vs rank(A) + s = {}", pbh.state_dim, pbh.rank_a + s),
        },
    ));
    lines.push((
        tc.holds,
        "spectral",
        if tc.rank_c < n {
            format!("rank(C) = {} < n = {n}", tc.rank_c)
        } else if let Some(z) = tc.failing_eigenvalue {
            format!(
                "rank C[lambda I - A, B] < n at lambda = {}",
                complex([z.re, z.im])
            )
        } else {
            format!(
                "rank(CA) = {} vs n - s = {}",
                tc.rank_ca,
                n.saturating_sub(s)
            )
        },
    ));
    let width = lines.iter().map(|l| l.1.len()).max().unwrap_or(0);
    let mut out = String::new();
    for (ok, name, detail) in lines {
        let _ = writeln!(out, "{}  {name:<width$}  {detail}", mark(ok));
    }
    Ok(out)
}

pub fn oracle_text(v: &OracleVerdict) -> String {
    let mut out = String::new();
    match v.horizon_found {
        Some(k) => {
            let _ = writeln!(out, "status            controllable");
            let _ = writeln!(out, "horizon K         {k}");
            if let Some(w) = &v.witness_supports {
                for (step, set) in w.iter().enumerate() {
                    let _ = writeln!(out, "support u_{:<6}  {{{}}}", step + 1, list(set));
                }
            }
        }
        None => {
            let _ = writeln!(out, "status            not controllable within horizon");
        }
    }
    let _ = writeln!(out, "explored horizon  {}", v.explored_horizon);
    let _ = writeln!(out, "states visited    {}", v.states_visited);
    out
}

pub fn design_text(sol: &DesignSolution, simulated: f64) -> String {
    let mut out = String::new();
    for (k, (u, set)) in sol
        .inputs
        .inputs()
        .iter()
        .zip(&sol.selected_supports)
        .enumerate()
    {
        let _ = writeln!(
            out,
            "u_{:<3} {}  support {{{}}}",
            k + 1,
            vector(u),
            list(set)
        );
    }
    let _ = writeln!(out, "residual            {:e}", sol.residual);
    let _ = writeln!(out, "simulated residual  {simulated:e}");
    if !sol.output_controllable {
        let _ = writeln!(out, "note                rank(CW) < n");
    }
    out
}

pub fn trajectory_text(t: &Trajectory) -> String {
    let mut out = String::new();
    for (k, (x, y)) in t.states.iter().zip(&t.outputs).enumerate() {
        let _ = writeln!(out, "k = {k:<3} x = {}  y = {}", vector(x), vector(y));
    }
    out
}
