//! One PASS/FAIL line per acceptance criterion. Runs without the libtest
//! harness so the lines are always printed; exits nonzero if any fails.

use std::time::Instant;

use riemann_gluer::assembly::{assemble, slice_mesh};
use riemann_gluer::battery::{self, Check};
use riemann_gluer::geometry::normal_graph::fit_slope;
use riemann_gluer::geometry::{Catenoid, Dimension, ScaleParameters};
use riemann_gluer::matcher::{MatchConfig, MatchOutcome, Matcher};
use riemann_gluer::neck::solve::neck_ball_scale;
use riemann_gluer::planar::solve::planar_ball_scale;
use riemann_gluer::spectral::ThetaGrid;
use riemann_gluer::Result;

type Verdict = Result<(bool, String)>;

fn summary(checks: &[Check]) -> (bool, String) {
    let pass = checks.iter().all(|c| c.pass);
    let text = checks
        .iter()
        .filter(|c| !c.pass)
        .map(|c| format!("{} = {:.4e} (target {:e})", c.invariant, c.measured, c.target))
        .collect::<Vec<_>>();
    let range = |f: fn(&Check) -> f64| checks.iter().map(f).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    let (lo, hi) = range(|c| c.measured);
    if text.is_empty() {
        (pass, format!("{} checks, measured in [{lo:.6}, {hi:.6}]", checks.len()))
    } else {
        (pass, text.join("; "))
    }
}

fn report(k: usize, name: &str, budget: f64, f: impl FnOnce() -> Verdict) -> bool {
    let start = Instant::now();
    let verdict = f();
    let secs = start.elapsed().as_secs_f64();
    let (ok, detail) = match verdict {
        Ok((ok, d)) => (ok && secs < budget, d),
        Err(e) => (false, format!("error: {e}")),
    };
    println!("{} [{k:>2}] {name}: {detail}; {secs:.1} s (budget {budget} s)", if ok { "PASS" } else { "FAIL" });
    ok
}

fn d0_oracle(n: usize) -> Result<f64> {
    // int_0^inf cosh((n-1) s)^(-(n-2)/(n-1)) ds = B(a/2, 1/2) / (2 (n-1))
    let nf = n as f64;
    let a = (nf - 2.0) / (nf - 1.0);
    let exact = statrs::function::beta::beta(a / 2.0, 0.5) / (2.0 * (nf - 1.0));
    Ok((Catenoid::new(Dimension::new(n)?)?.d0() - exact).abs() / exact)
}

fn solve(eps: f64) -> Result<MatchOutcome> {
    Matcher::new(ScaleParameters::new(Dimension::new(3)?, eps)?, MatchConfig::default())?.solve()
}

fn main() {
    let mut all = true;

    all &= report(1, "catenoid mean curvature order 2 (n = 3, 4)", 10.0, || {
        let checks = vec![battery::catenoid_minimality(3)?, battery::catenoid_minimality(4)?];
        let (ok, s) = summary(&checks);
        let d0 = (3..=6).map(d0_oracle).collect::<Result<Vec<_>>>()?.into_iter().fold(0.0, f64::max);
        Ok((ok && d0 < 1e-10, format!("{s}; d0 vs beta function rel. error {d0:.1e}")))
    });

    all &= report(2, "Jacobi fields (i)-(iv) in the kernel at order 2 (n = 3, 4)", 10.0, || {
        let mut c = battery::jacobi_kernel(3)?;
        c.extend(battery::jacobi_kernel(4)?);
        Ok(summary(&c))
    });

    all &= report(3, "Poisson decay within 1% of delta_j, j = 2..4; j = 2 constant <= 1 + 1e-6", 5.0, || {
        let mut c = Vec::new();
        for n in 3..=5 {
            c.extend(battery::poisson_decay(n)?);
        }
        let worst = c.iter().filter(|c| c.invariant.contains("constant")).map(|c| c.measured).fold(0.0, f64::max);
        let (ok, s) = summary(&c);
        Ok((ok, format!("{s}; largest constant {worst:.15}")))
    });

    all &= report(4, "injectivity exponents j = 2..12 positive, within 1% of delta_j", 5.0, || {
        let mut c = battery::injectivity(3, 12)?;
        c.extend(battery::injectivity(4, 12)?);
        let rel = c.iter().map(|c| (c.measured - c.target).abs() / c.target).fold(0.0, f64::max);
        let (ok, s) = summary(&c);
        Ok((ok, format!("{s}; worst relative error {rel:.2e}")))
    });

    all &= report(5, "remainder slope 2.0 +- 0.1, cubic residual slope 3.0 +- 0.15", 30.0, || {
        let c = battery::nonlinear_structure(3)?;
        Ok((c.iter().all(|c| c.pass), format!("slopes {:.4} and {:.4}", c[0].measured, c[1].measured)))
    });

    all &= report(6, "P eigenvalues -(n - 2 + 2j) to 1e-8, j = 0..12, n = 3..5", 1.0, || {
        let mut c = Vec::new();
        for n in 3..=5 {
            c.extend(battery::dtn_table(n, 12)?);
        }
        let err = c.iter().map(|c| (c.measured - c.target).abs()).fold(0.0, f64::max);
        Ok((c.iter().all(|c| c.pass), format!("{} eigenvalues, largest error {err:.1e}", c.len())))
    });

    all &= report(7, "inner contractions <= 0.6 and first-iterate slopes within 10% (n = 3)", 600.0, || {
        let eps = [1e-2, 1e-3, 1e-4];
        let (mut neck, mut planar, mut nf, mut pf, mut ns, mut ps) = (0.0f64, 0.0f64, vec![], vec![], vec![], vec![]);
        for &e in &eps {
            let o = solve(e)?;
            let log = &o.state.iteration_log;
            neck = neck.max(log.iter().map(|l| l.neck_max_ratio).fold(0.0, f64::max));
            planar = planar.max(log.iter().map(|l| l.planar_max_ratio).fold(0.0, f64::max));
            nf.push(o.state.neck_first_iterate);
            pf.push(o.state.planar_first_iterate);
            ns.push(neck_ball_scale(&o.state.scales));
            ps.push(planar_ball_scale(&o.state.scales, o.planar.ubar.nu));
        }
        let (sn, en) = (fit_slope(&eps, &nf), fit_slope(&eps, &ns));
        let (sp, ep) = (fit_slope(&eps, &pf), fit_slope(&eps, &ps));
        let ok = neck <= 0.6 && planar <= 0.6 && (sn / en - 1.0).abs() <= 0.1 && (sp / ep - 1.0).abs() <= 0.1;
        Ok((ok, format!("ratios neck {neck:.4} planar {planar:.4}; slopes neck {sn:.4} vs {en:.4}, planar {sp:.4} vs {ep:.4}")))
    });

    let mut outcome = None;
    all &= report(8, "outer fixed point at n = 3, eps = 1e-3", 900.0, || {
        let o = solve(1e-3)?;
        let st = &o.state;
        let ds = st.scales.data_scale();
        let theta = ThetaGrid::new(st.scales.n, 48, 12)?;
        let (ratio, jump, norm) = (st.max_ratio(), st.mismatch.sup() / ds, st.norm(&theta) / (2.0 * st.c0 * ds));
        outcome = Some(o);
        Ok((
            ratio <= 0.6 && jump < 1e-8 && norm <= 1.0,
            format!("contraction {ratio:.4}; C1 jump {jump:.2e} eps r_eps^2; norm {norm:.4} of 2 c0 eps r_eps^2"),
        ))
    });

    all &= report(9, "assembled period: h_eps > 0, G-invariant, periodic, one tunnel", 120.0, || {
        let Some(o) = outcome.as_ref() else {
            return Ok((false, "no solved state".into()));
        };
        let s = assemble(o)?;
        let tol = 1e-8 * o.state.scales.data_scale() * s.placement.scale;
        let inv = s.invariance_defect();
        let tunnels = slice_mesh(&s).quotient_topology().tunnels();
        let ok = s.params.h_eps > 0.0 && inv < 1e-10 && s.periodicity_residual < tol && tunnels == Some(1);
        Ok((
            ok,
            format!(
                "h_eps {:.6e}; invariance {inv:.1e}; periodicity residual {:.1e} (tolerance {tol:.1e}); tunnels {tunnels:?}",
                s.params.h_eps, s.periodicity_residual
            ),
        ))
    });

    all &= report(10, "2D level sets are circles, n = 3 model level sets are not spheres", 60.0, || {
        let c = battery::asphericity(3, 64)?;
        Ok((
            c.iter().all(|c| c.pass),
            format!("circle deviation {:.1e}; sphere deviation {:.4e}, change under ray doubling {:.2e}", c[0].measured, c[1].measured, c[2].measured),
        ))
    });

    all &= report(11, "2D Riemann baseline curvature order 2 (mu = 0, 1)", 10.0, || {
        let mut c = battery::baseline2d(0.0)?;
        c.extend(battery::baseline2d(1.0)?);
        Ok((
            c.iter().all(|c| c.pass),
            format!("orders {:.4}, {:.4}; conservation defects {:.1e}, {:.1e}", c[1].measured, c[3].measured, c[0].measured, c[2].measured),
        ))
    });

    if !all {
        std::process::exit(1);
    }
}
