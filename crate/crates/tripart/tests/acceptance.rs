//! Acceptance criteria. Each criterion prints one PASS/FAIL line; the test
//! fails at the end if any criterion failed.

use std::path::PathBuf;
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tripart::io::read_case;
use tripart_core::case::{synth_case, PlanningCase, Scale};
use tripart_core::channel::{AgentMode, ChannelArray, Penalty};
use tripart_core::coordinator::{
    admm_run, build_joint_model, solve_joint, update_consensus, AdmmConfig, ConsensusState, JointModel, Powers,
};
use tripart_core::electric::build_electric_model;
use tripart_core::gas::{build_gas_model, make_pwl_grid};
use tripart_core::milp::{solve_mip, Model, SolverConfig, Status};
use tripart_core::oracle::{compare_solutions, enumerate_mip, DEFAULT_INTEGER_LIMIT};
use tripart_core::ries::{build_ries_model, RiesMode};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn desk3() -> PlanningCase {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../cases/desk3.json");
    read_case(&path).expect("shipped case")
}

// ---------------------------------------------------------------- criterion 1

fn random_array(rng: &mut ChaCha8Rng, shape: (usize, usize, usize), hi: f64) -> ChannelArray {
    let mut arr = ChannelArray::zeros(shape.0, shape.1, shape.2);
    for v in &mut arr.data {
        *v = rng.random_range(0.0..hi);
    }
    arr
}

fn oracle_models(case: &PlanningCase, seed: u64) -> Vec<(&'static str, Model)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gs = (case.gas.nodes.len(), case.ries.len(), case.horizon);
    let es = (case.electric.buses.len(), case.ries.len(), case.horizon);
    let lg = [random_array(&mut rng, gs, 1e-5), random_array(&mut rng, gs, 1e-5)];
    let le = [random_array(&mut rng, es, 1e-3), random_array(&mut rng, es, 1e-3)];
    let ipg = random_array(&mut rng, gs, case.gas_channel_cap(0));
    let ipe = random_array(&mut rng, es, case.elec_channel_cap(0));
    let pen = |lambda, ip, rho| Penalty {
        lambda,
        ip,
        rho,
        knots: 8,
    };
    vec![
        ("gas", build_gas_model(case, AgentMode::JointSlice).unwrap().0),
        ("gas-admm", build_gas_model(case, AgentMode::Admm(pen(&lg[0], &ipg, 1e-6))).unwrap().0),
        ("electric", build_electric_model(case, AgentMode::JointSlice).unwrap().0),
        ("electric-admm", build_electric_model(case, AgentMode::Admm(pen(&le[0], &ipe, 1e-3))).unwrap().0),
        ("ries", build_ries_model(case, RiesMode::JointSlice).unwrap().0),
        (
            "ries-admm",
            build_ries_model(
                case,
                RiesMode::Admm {
                    gas: pen(&lg[1], &ipg, 1e-6),
                    elec: pen(&le[1], &ipe, 1e-3),
                },
            )
            .unwrap()
            .0,
        ),
        ("joint", build_joint_model(case).unwrap().model),
    ]
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut checked = 0;
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    for seed in 1..=8 {
        let case = synth_case(seed, Scale::Tiny);
        for (name, model) in oracle_models(&case, seed) {
            if model.free_integer_vars().len() > DEFAULT_INTEGER_LIMIT {
                failures.push(format!("seed {seed} {name}: too many integers"));
                continue;
            }
            let bb = solve_mip(&model, &SolverConfig::default()).unwrap();
            let or = enumerate_mip(&model, DEFAULT_INTEGER_LIMIT).unwrap();
            let verdict = compare_solutions(&model, &bb, &or, 1e-6);
            if let (Some(a), Some(b)) = (bb.has_point().then_some(bb.objective), or.objective) {
                worst = worst.max((a - b).abs());
            }
            checked += 1;
            if !verdict.pass {
                failures.push(format!("seed {seed} {name}: {verdict}"));
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        checked >= 50 && failures.is_empty() && secs < 300.0,
        format!("{checked} models, worst |Δobj| {worst:.1e}, {secs:.1} s, failures {failures:?}"),
    )
}

// ---------------------------------------------------------------- criterion 2

fn check_plan(case: &PlanningCase, joint: &JointModel, x: &[f64]) -> Vec<String> {
    let mut bad = Vec::new();
    let tol = 1e-6;
    let val = |v: tripart_core::milp::VarId| x[v.index()];
    let t_len = case.horizon;

    // gas: gating, PWL ordering and knot consistency, nodal balance
    let g = &joint.gas;
    for (p, (pipe, _)) in case.gas.pipes().enumerate() {
        let built = g.build[p].is_none_or(|y| val(y) > 0.5);
        let grid = &g.grids[p];
        for (k, b) in grid.breakpoints.iter().enumerate() {
            if (grid.images[k] - b * b.abs()).abs() > 1e-9 * (1.0 + b * b) {
                bad.push(format!("pipe {} knot {k} image off", pipe.id));
            }
        }
        for t in 0..t_len {
            let flow = val(g.flow[p][t]);
            if !built && flow.abs() > tol {
                bad.push(format!("unbuilt pipe {} carries {flow}", pipe.id));
            }
            let fill: Vec<f64> = g.fill[p][t].iter().map(|&d| val(d)).collect();
            if built && (grid.evaluate(&fill).0 - flow).abs() > 1e-5 * (1.0 + flow.abs()) {
                bad.push(format!("pipe {} t {t}: flow off its fill", pipe.id));
            }
            for k in 0..fill.len() - 1 {
                if fill[k + 1] > 1e-9 && fill[k] < 1.0 - 1e-9 {
                    bad.push(format!("pipe {} t {t}: fill out of order", pipe.id));
                }
            }
        }
    }
    for (m, node) in case.gas.nodes.iter().enumerate() {
        for t in 0..t_len {
            let mut r = -case.gas_load(m, t);
            for (s, src) in case.gas.sources.iter().enumerate() {
                if src.node == node.id {
                    r += val(g.source[s][t]);
                }
            }
            for (p, (pipe, _)) in case.gas.pipes().enumerate() {
                let f = val(g.flow[p][t]);
                if pipe.from == node.id {
                    r -= f;
                }
                if pipe.to == node.id {
                    r += f;
                }
            }
            for h in 0..case.ries.len() {
                if let Some(v) = g.tp.get(m, h, t) {
                    r -= val(v);
                }
            }
            if r.abs() > tol * (1.0 + case.gas_load(m, t)) {
                bad.push(format!("gas node {} t {t}: imbalance {r}", node.id));
            }
        }
    }

    // electric: gating, KCL, commitment logic and windows
    let e = &joint.electric;
    for (l, (line, _)) in case.electric.lines().enumerate() {
        if e.build[l].is_some_and(|y| val(y) < 0.5) {
            for t in 0..t_len {
                if val(e.flow[l][t]).abs() > tol {
                    bad.push(format!("unbuilt line {} carries flow", line.id));
                }
            }
        }
    }
    for (n, b) in case.electric.buses.iter().enumerate() {
        for t in 0..t_len {
            let mut r = -case.elec_load(n, t);
            for (j, gen) in case.electric.generators.iter().enumerate() {
                if gen.bus == b.id {
                    r += val(e.output[j][t]);
                }
            }
            for (l, (line, _)) in case.electric.lines().enumerate() {
                let f = val(e.flow[l][t]);
                if line.from == b.id {
                    r -= f;
                }
                if line.to == b.id {
                    r += f;
                }
            }
            for h in 0..case.ries.len() {
                if let Some(v) = e.tp.get(n, h, t) {
                    r -= val(v);
                }
            }
            if r.abs() > tol * (1.0 + case.elec_load(n, t)) {
                bad.push(format!("bus {} t {t}: KCL residual {r}", b.id));
            }
        }
    }
    for (j, gen) in case.electric.generators.iter().enumerate() {
        let u: Vec<bool> = e.on[j].iter().map(|&v| val(v) > 0.5).collect();
        for t in 1..t_len {
            let (v, w) = (e.startup[j][t].map_or(0.0, val), e.shutdown[j][t].map_or(0.0, val));
            let du = f64::from(u8::from(u[t])) - f64::from(u8::from(u[t - 1]));
            if (v - w - du).abs() > tol || v + w > 1.0 + tol {
                bad.push(format!("generator {} t {t}: start/stop logic", gen.id));
            }
            let hold = |len: usize, state: bool| (t..(t + len).min(t_len)).all(|k| u[k] == state);
            if u[t] && !u[t - 1] && !hold(gen.min_up, true) {
                bad.push(format!("generator {} t {t}: min up violated", gen.id));
            }
            if !u[t] && u[t - 1] && !hold(gen.min_down, false) {
                bad.push(format!("generator {} t {t}: min down violated", gen.id));
            }
        }
    }

    // RIES: site gating, storage exclusivity and periodic state of charge
    for (h, (spec, unit)) in case.ries.iter().zip(&joint.ries.units).enumerate() {
        for &(m, s) in &unit.gas_sites {
            if val(s) < 0.5 && (0..t_len).any(|t| joint.ries.rp_gas.get(m, h, t).is_some_and(|v| val(v) > tol)) {
                bad.push(format!("{}: closed gas site receives gas", spec.name));
            }
        }
        for &(n, s) in &unit.bus_sites {
            if val(s) < 0.5 && (0..t_len).any(|t| joint.ries.rp_elec.get(n, h, t).is_some_and(|v| val(v) > tol)) {
                bad.push(format!("{}: closed bus site receives power", spec.name));
            }
        }
        for (ess, sv) in spec.storage.iter().zip(&unit.storage) {
            for t in 0..t_len {
                let (c, d) = (val(sv.charge[t]), val(sv.discharge[t]));
                if val(sv.charging[t]) + val(sv.discharging[t]) > 1.0 + tol || (c > tol && d > tol) {
                    bad.push(format!("{} t {t}: storage charges and discharges", spec.name));
                }
                let prev = val(sv.soc[(t + t_len - 1) % t_len]);
                let next = prev + ess.eta_charge * c - d / ess.eta_discharge;
                if (val(sv.soc[t]) - next).abs() > tol {
                    bad.push(format!("{} t {t}: state of charge off its dynamics", spec.name));
                }
            }
            if (val(sv.soc[0]) - val(sv.soc[t_len - 1])).abs() > tol {
                bad.push(format!("{}: state of charge not periodic", spec.name));
            }
        }
        for (d, dev) in spec.devices.iter().enumerate() {
            if val(unit.built[d]) < 0.5 && (0..t_len).any(|t| val(unit.input[d][t]) > tol) {
                bad.push(format!("{}: unbuilt {} runs", spec.name, dev.kind.name()));
            }
        }
    }
    bad
}

fn consensus_rules() -> Vec<String> {
    let mut bad = Vec::new();
    let cfg = AdmmConfig::default().with_rho([3.0, 5.0, 7.0, 11.0]);
    let start = ConsensusState::initial((1, 1, 2), (1, 1, 2), 1.0, 0.0);
    let arr = |a: f64, b: f64| ChannelArray {
        data: vec![a, b],
        ..ChannelArray::zeros(1, 1, 2)
    };
    let powers = |k: f64| Powers {
        tp_gas: arr(4.0 * k, -k),
        rp_gas: arr(1.0 * k, 2.0 * k),
        tp_elec: arr(0.5 * k, 3.0 * k),
        rp_elec: arr(2.5 * k, 0.0),
    };
    let one = update_consensus(&start, &powers(1.0), &cfg).unwrap();
    let two = update_consensus(&start, &powers(2.0), &cfg).unwrap();
    let p = powers(1.0);
    for i in 0..2 {
        let ip_g = 0.5 * (p.tp_gas.data[i] + p.rp_gas.data[i]);
        let ip_e = 0.5 * (p.tp_elec.data[i] + p.rp_elec.data[i]);
        if one.ip_gas.data[i] != ip_g || one.ip_elec.data[i] != ip_e {
            bad.push(format!("channel {i}: intermediate power is not the midpoint"));
        }
        let steps = [
            (one.lambda_gn.data[i], two.lambda_gn.data[i], 3.0 * (p.tp_gas.data[i] - ip_g)),
            (one.lambda_en.data[i], two.lambda_en.data[i], 5.0 * (p.tp_elec.data[i] - ip_e)),
            (one.lambda_ehg.data[i], two.lambda_ehg.data[i], 7.0 * (p.rp_gas.data[i] - ip_g)),
            (one.lambda_ehe.data[i], two.lambda_ehe.data[i], 11.0 * (p.rp_elec.data[i] - ip_e)),
        ];
        for (a, b, step) in steps {
            if (a - 1.0 - step).abs() > 1e-12 || (b - 1.0 - 2.0 * step).abs() > 1e-12 {
                bad.push(format!("channel {i}: multiplier step not linear in the residual"));
            }
        }
    }
    bad
}

fn constraint_families() -> Outcome {
    let start = Instant::now();
    let mut cases: Vec<PlanningCase> = (1..=3).map(|s| synth_case(s, Scale::Tiny)).collect();
    cases.push(desk3());
    let mut bad = consensus_rules();
    let mut storage = 0;
    for case in &cases {
        let joint = build_joint_model(case).unwrap();
        let sol = solve_mip(&joint.model, &SolverConfig::default()).unwrap();
        if sol.status != Status::Optimal {
            bad.push(format!("{}: joint solve {:?}", case.name, sol.status));
            continue;
        }
        storage += case.ries.iter().map(|r| r.storage.len()).sum::<usize>();
        bad.extend(check_plan(case, &joint, &sol.values).into_iter().map(|m| format!("{}: {m}", case.name)));
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        bad.is_empty() && storage > 0 && secs < 120.0,
        format!("{} solved cases, {storage} storage options, {secs:.1} s, violations {bad:?}", cases.len()),
    )
}

// ---------------------------------------------------------------- criterion 3

fn joint_vs_distributed() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for seed in 1..=3 {
        let case = synth_case(seed, Scale::Tiny);
        let joint = solve_joint(&case, &SolverConfig::default()).unwrap();
        let (admm, _) = admm_run(&case, &AdmmConfig::for_case(&case)).unwrap();
        let j = joint.plan.map_or(f64::INFINITY, |p| p.total_cost);
        let d = admm.plan.total_cost;
        let tol = admm.penalty_tolerance();
        ok &= joint.status == Status::Optimal && j <= d + tol;
        parts.push(format!("seed {seed}: joint {j:.6} dist {d:.6} tol {tol:.1e}"));
    }
    outcome(ok, parts.join("; "))
}

// ---------------------------------------------------------------- criterion 4

fn admm_defaults() -> Outcome {
    let case = synth_case(1, Scale::Tiny);
    let config = AdmmConfig::for_case(&case);
    let (out, _) = admm_run(&case, &config).unwrap();
    let pass = config.rho() == [100.0; 4]
        && config.eps_gas == 1e-3
        && config.eps_elec == 1e-3
        && out.converged()
        && out.iterations <= 200
        && out.mismatch_gas <= 2e-3
        && out.mismatch_elec <= 2e-3;
    outcome(
        pass,
        format!(
            "{:?} after {} iterations, max |TP-RP| gas {:.1e} elec {:.1e}",
            out.status, out.iterations, out.mismatch_gas, out.mismatch_elec
        ),
    )
}

// ---------------------------------------------------------------- criterion 5

fn penalty_sweep() -> Outcome {
    let case = synth_case(1, Scale::Tiny);
    let base = AdmmConfig::for_case(&case);
    let grid = [0.1, 1.0, 10.0, 100.0, 200.0];
    let rows: Vec<_> = grid
        .iter()
        .map(|&r| (r, admm_run(&case, &base.with_rho([r; 4])).unwrap().0))
        .collect();
    let reference = rows.iter().find(|(r, _)| *r == 100.0).unwrap().1.plan.total_cost;
    let top_two = rows[3..].iter().all(|(_, o)| o.converged());
    let spread = rows
        .iter()
        .filter(|(_, o)| o.converged())
        .map(|(_, o)| (o.plan.total_cost - reference).abs() / reference)
        .fold(0.0, f64::max);
    let failed: Vec<f64> = rows.iter().filter(|(_, o)| !o.converged()).map(|(r, _)| *r).collect();
    let iters: Vec<String> = rows.iter().map(|(r, o)| format!("ρ={r}:{}", o.iterations)).collect();
    outcome(
        top_two && spread <= 0.01,
        format!(
            "iterations [{}], max objective spread {:.2e}, not converged {failed:?}",
            iters.join(" "),
            spread
        ),
    )
}

// ---------------------------------------------------------------- criterion 6

/// Inverse of the chord interpolant of `x|x|` on a uniform grid over [-g, g].
fn chord_flow(y: f64, g: f64, seg: usize) -> f64 {
    let h = 2.0 * g / seg as f64;
    let k = (0..seg)
        .find(|&k| {
            let b = -g + (k + 1) as f64 * h;
            y <= b * b.abs()
        })
        .unwrap_or(seg - 1);
    let a = -g + k as f64 * h;
    let b = a + h;
    a + (y - a * a.abs()) / (b * b.abs() - a * a.abs()) * h
}

/// Largest flow error of the chord inverse, by dense scan.
fn analytic_bound(g: f64, seg: usize) -> f64 {
    let n = 40_000;
    (0..=n)
        .map(|i| {
            let x = -g + 2.0 * g * i as f64 / n as f64;
            (chord_flow(x * x.abs(), g, seg) - x).abs()
        })
        .fold(0.0, f64::max)
}

fn two_node(p_from: f64, p_to: f64, w: f64, g: f64, seg: usize) -> PlanningCase {
    let text = format!(
        r#"{{"name":"pipe","horizon":1,"segments":{seg},"price_elec":0.0,"price_gas":0.0,"gas_energy_factor":0.0105,
        "gas":{{"nodes":[{{"id":1,"pressure_min":{p_from},"pressure_max":{p_from},"load":[{g}]}},
                        {{"id":2,"pressure_min":{p_to},"pressure_max":{p_to},"load":[{g}]}}],
               "sources":[{{"id":1,"node":1,"output_min":0,"output_max":{s},"ramp_down":{s},"ramp_up":{s},"cost":1e-6}},
                          {{"id":2,"node":2,"output_min":0,"output_max":{s},"ramp_down":{s},"ramp_up":{s},"cost":2e-6}}],
               "existing_pipes":[{{"id":1,"from":1,"to":2,"weymouth":{w},"flow_max":{g},"invest_cost":0,
                                   "compressor_allowed":false,"compressor_cost":0}}],
               "candidate_pipes":[]}},
        "electric":{{"buses":[{{"id":1,"load":[0]}}],"generators":[],"existing_lines":[],"candidate_lines":[],"slack_bus":1}},
        "ries":[]}}"#,
        s = 2.0 * g
    );
    tripart::io::parse_case(&text).expect("fixture case")
}

/// Worst observed |solved − Weymouth| flow over a sweep of pinned pressures.
fn observed_error(seg: usize, w: f64, g: f64) -> (f64, f64) {
    let mut worst: f64 = 0.0;
    let p_to = 40.0;
    for i in 0..=200 {
        let target = -g + 2.0 * g * i as f64 / 200.0;
        let p_from = (p_to * p_to + target * target.abs() / (w * w)).sqrt();
        let case = two_node(p_from, p_to, w, g, seg);
        let (model, vars) = build_gas_model(&case, AgentMode::JointSlice).unwrap();
        let sol = solve_mip(&model, &SolverConfig::default()).unwrap();
        assert_eq!(sol.status, Status::Optimal);
        let d = p_from * p_from - p_to * p_to;
        let exact = d.signum() * w * d.abs().sqrt();
        worst = worst.max((sol.values[vars.flow[0][0].index()] - exact).abs());
    }
    (worst, analytic_bound(g, seg))
}

fn weymouth_pwl() -> Outcome {
    let (w, g) = (1.0, 40.0);
    let (e3, b3) = observed_error(3, w, g);
    let (e6, b6) = observed_error(6, w, g);
    let (e12, _) = observed_error(12, w, g);
    let grid_bound = make_pwl_grid(g, 3).unwrap().max_flow_error();
    let within = e3 <= b3 + 1e-6 && (grid_bound - b3).abs() < 1e-3 && e6 <= b6 + 1e-6;
    let ratio = e3 / e6;
    let halves = (2.0 / 1.5..=2.0 * 1.5).contains(&ratio);
    outcome(
        within && halves,
        format!(
            "seg 3 error {e3:.4} (bound {b3:.4}), seg 6 error {e6:.4} (bound {b6:.4}), ratio 3→6 {ratio:.3}, \
             ratio 6→12 {:.3}",
            e6 / e12
        ),
    )
}

// ---------------------------------------------------------------- criterion 7

fn determinism() -> Outcome {
    let case = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../cases/desk3.json");
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        let status = Command::new(env!("CARGO_BIN_EXE_tripart"))
            .args(["plan", "admm", "--case"])
            .arg(&case)
            .arg("--out")
            .arg(d.path())
            .output()
            .unwrap()
            .status;
        if !status.success() {
            return outcome(false, format!("plan admm exited with {status}"));
        }
    }
    let same = |name: &str| {
        let a = std::fs::read(dirs[0].path().join(name)).unwrap();
        let b = std::fs::read(dirs[1].path().join(name)).unwrap();
        !a.is_empty() && a == b
    };
    let (trace, solution) = (same("trace.csv"), same("solution.json"));
    outcome(trace && solution, format!("trace identical {trace}, solution identical {solution}"))
}

type Criterion = (&'static str, fn() -> Outcome);

#[test]
fn acceptance() {
    let criteria: [Criterion; 7] = [
        ("1 oracle equivalence", oracle_equivalence),
        ("2 constraint families", constraint_families),
        ("3 joint vs distributed", joint_vs_distributed),
        ("4 ADMM at defaults", admm_defaults),
        ("5 penalty sweep", penalty_sweep),
        ("6 Weymouth PWL error", weymouth_pwl),
        ("7 determinism", determinism),
    ];
    let mut failed = Vec::new();
    for (name, run) in criteria {
        let out = run();
        println!("{} criterion {name}: {}", if out.pass { "PASS" } else { "FAIL" }, out.detail);
        if !out.pass {
            failed.push(name);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
