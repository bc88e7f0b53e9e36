//! Acceptance criteria, one line of output each. Exits non-zero if any fails.

use std::f64::consts::TAU;
use std::process::ExitCode;
use std::time::Instant;

use yamabe::analysis::{
    angle_monotonicity_scan, degeneration_probe, derivative_fidelity, growth_bound_violation,
    hessian_spectrum, max_principle_along_trace, minor_determinant_check, random_tetrahedra,
};
use yamabe::flow::assemble_laplacian;
use yamabe::{
    curvature, preset, run_flow, ConformalTetra, FlowConfig, FlowTrace, MetricAssignment,
    SimplicialComplex,
};

const SEED: u64 = 20_240_607;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn initial_states() -> Vec<(&'static str, SimplicialComplex, MetricAssignment)> {
    let (dt, mut dm) = preset("double_tetrahedron").unwrap();
    dm.set(4, 2.0).unwrap();
    let (bs, mut bm) = preset("boundary_4_simplex").unwrap();
    bm.set(5, 3.0).unwrap();
    vec![
        ("double_tetrahedron", dt, dm),
        ("boundary_4_simplex", bs, bm),
    ]
}

fn flow(c: &SimplicialComplex, m: &MetricAssignment, t_end: f64) -> (FlowTrace, f64) {
    let start = Instant::now();
    let config = FlowConfig {
        t_end,
        ..FlowConfig::default()
    };
    let trace = run_flow(c, m, &config).unwrap();
    (trace, start.elapsed().as_secs_f64())
}

fn derivative_formulas() -> Outcome {
    let start = Instant::now();
    let mut alpha = 0.0f64;
    let mut beta = 0.0f64;
    for t in random_tetrahedra(1000, SEED) {
        let f = derivative_fidelity(&t).unwrap();
        alpha = alpha.max(f.dalpha_error);
        beta = beta.max(f.dbeta_error);
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        alpha <= 1e-6 && beta <= 1e-6 && secs < 5.0,
        format!("solid-angle derivatives {alpha:.2e}, dihedral derivatives {beta:.2e}, {secs:.2}s"),
    )
}

fn schlafli() -> Outcome {
    let mut rows = 0.0f64;
    let mut symmetry = 0.0f64;
    for t in random_tetrahedra(1000, SEED) {
        let block = t.omega_block().unwrap();
        rows = rows.max(block.max_row_residual(&t.weights()));
        symmetry = symmetry.max(block.symmetry_defect());
    }
    outcome(
        rows <= 1e-12 && symmetry <= 1e-12,
        format!("row residual {rows:.2e}, asymmetry {symmetry:.2e}"),
    )
}

fn counterexample() -> Outcome {
    let t = ConformalTetra::new([1.0, 1.0, 1.0, 0.2]).unwrap();
    let q = t.nondegeneracy_q();
    let omega = t.omega_block().unwrap().omega[0][1];
    let expected =
        -8.0 / (75.0 * t.perimeter(0, 1, 2) * t.perimeter(0, 1, 3) * t.volume().unwrap());
    let rel = ((omega - expected) / expected).abs();
    outcome(
        (q - 8.0).abs() < 1e-12 && omega < 0.0 && rel <= 1e-10,
        format!(
            "Q = {q}, omega = {omega:.16e}, expected {expected:.16e}, relative error {rel:.2e}"
        ),
    )
}

fn spectrum() -> Outcome {
    let regular = hessian_spectrum(&ConformalTetra::new([1.0; 4]).unwrap()).unwrap();
    let target = -2.0 * 2f64.sqrt() / 3.0;
    let regular_ok = regular.eigenvalues[..3]
        .iter()
        .all(|v| (v - target).abs() <= 1e-9)
        && regular.eigenvalues[3].abs() <= 1e-9;
    let mut null = 0.0f64;
    let mut rank3 = true;
    let mut angle = 0.0f64;
    let mut minors = 0.0f64;
    for t in random_tetrahedra(1000, SEED) {
        let s = hessian_spectrum(&t).unwrap();
        null = null.max(s.eigenvalues[3] / s.spectral_radius);
        rank3 &= s.eigenvalues[2] < -1e-12 * s.spectral_radius;
        angle = angle.max(s.null_vector_angle);
        minors = minors.max(minor_determinant_check(&t).unwrap());
    }
    outcome(
        regular_ok && null <= 1e-9 && rank3 && angle <= 1e-7 && minors <= 1e-8,
        format!(
            "regular {:?}; max eigenvalue/radius {null:.2e}, rank 3 {rank3}, null angle {angle:.2e}, minors {minors:.2e}",
            regular.eigenvalues
        ),
    )
}

fn maximum_principle() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, c, m) in initial_states() {
        let (trace, secs) = flow(&c, &m, 10.0);
        let audit = max_principle_along_trace(&trace);
        let run_ok = audit.max_non_increasing
            && audit.min_non_decreasing
            && audit.monotone_throughout
            && secs < 2.0;
        ok &= run_ok;
        parts.push(format!(
            "{name}: max K rise {:.1e}, min K drop {:.1e}, monotone {}, {secs:.2}s",
            audit.worst_max_increase, audit.worst_min_decrease, audit.monotone_throughout
        ));
    }
    outcome(ok, parts.join("; "))
}

fn convergence() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for ((name, c, m), t_end) in initial_states().into_iter().zip([1.0, 10.0]) {
        let (trace, _) = flow(&c, &m, t_end);
        let spread = trace.last().k_spread();
        ok &= spread < 1e-6;
        parts.push(format!(
            "{name}: spread {spread:.3e} at t = {}",
            trace.last().t
        ));
    }
    outcome(ok, parts.join("; "))
}

fn growth_bounds() -> Outcome {
    let mut worst = f64::NEG_INFINITY;
    for (_, c, m) in initial_states() {
        let (trace, _) = flow(&c, &m, 10.0);
        worst = worst.max(growth_bound_violation(&trace));
    }
    outcome(
        worst <= 1e-8,
        format!("worst relative excursion {worst:.2e}"),
    )
}

fn angle_ordering() -> Outcome {
    let scan = angle_monotonicity_scan(10_000, SEED);
    outcome(
        scan.violations == 0 && scan.face_area_violations == 0,
        format!(
            "{} samples: {} ordering violations, {} face-area violations",
            scan.samples, scan.violations, scan.face_area_violations
        ),
    )
}

fn degeneration() -> Outcome {
    let t = ConformalTetra::new([1.0, 1.0, 1.0, 0.3]).unwrap();
    let report = degeneration_probe(&t, [0.0, 0.0, 0.0, -1.0]).unwrap();
    let last = report.levels.last().unwrap();
    let ok = (last.relative_q - 1e-10).abs() < 1e-12
        && report.min_slot == 3
        && report.min_slot_angle > TAU - 1e-3
        && report.max_other_angle < 1e-3;
    outcome(
        ok,
        format!(
            "relative Q {:.3e}: minimum-slot angle 2pi - {:.2e}, largest other {:.2e}",
            last.relative_q,
            TAU - report.min_slot_angle,
            report.max_other_angle
        ),
    )
}

fn scale_invariance() -> Outcome {
    let mut worst = 0.0f64;
    let rel = |a: &[f64], b: &[f64]| {
        let scale = a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        a.iter()
            .zip(b)
            .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
            / scale
    };
    let mut states = initial_states();
    let (c, mut m) = preset("double_tetrahedron").unwrap();
    m.set(4, 0.2).unwrap();
    states.push(("counterexample", c, m));
    for (_, c, m) in &states {
        let k = curvature(c, m).unwrap().k;
        let a: Vec<f64> = assemble_laplacian(c, m).unwrap().a.into_values().collect();
        for lambda in [1e-3, 1.0, 1e3] {
            let scaled = m.scaled(lambda).unwrap();
            worst = worst.max(rel(&k, &curvature(c, &scaled).unwrap().k));
            let sa: Vec<f64> = assemble_laplacian(c, &scaled)
                .unwrap()
                .a
                .into_values()
                .collect();
            worst = worst.max(rel(&a, &sa));
        }
    }
    for t in random_tetrahedra(1000, SEED) {
        let omega: Vec<f64> = t
            .omega_block()
            .unwrap()
            .omega
            .into_iter()
            .flatten()
            .collect();
        let alpha = t.solid_angles().unwrap();
        for lambda in [1e-3, 1.0, 1e3] {
            let s = t.scaled(lambda).unwrap();
            let so: Vec<f64> = s
                .omega_block()
                .unwrap()
                .omega
                .into_iter()
                .flatten()
                .collect();
            worst = worst.max(rel(&omega, &so));
            worst = worst.max(rel(&alpha, &s.solid_angles().unwrap()));
        }
    }
    outcome(worst <= 1e-12, format!("worst relative change {worst:.2e}"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        (
            "derivative formulas vs finite differences",
            derivative_formulas,
        ),
        ("Schlafli identity and Jacobian symmetry", schlafli),
        ("negative-weight counterexample", counterexample),
        ("Jacobian spectrum and minor determinants", spectrum),
        ("maximum principle along preset flows", maximum_principle),
        ("convergence at desk scale", convergence),
        ("exponential growth bounds", growth_bounds),
        ("solid-angle and face-area ordering", angle_ordering),
        ("degeneration limit", degeneration),
        ("scale invariance", scale_invariance),
    ];
    let mut failures = 0;
    for (n, (name, check)) in criteria.iter().enumerate() {
        let result = check();
        let status = if result.passed { "PASS" } else { "FAIL" };
        println!("criterion {:>2} {status}: {name}: {}", n + 1, result.detail);
        failures += usize::from(!result.passed);
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failures,
        criteria.len()
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
