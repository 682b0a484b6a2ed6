//! Branch and bound against assignment enumeration on every model builder.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tripart_core::case::{synth_case, PlanningCase, Scale};
use tripart_core::channel::{AgentMode, ChannelArray, Penalty};
use tripart_core::coordinator::build_joint_model;
use tripart_core::electric::build_electric_model;
use tripart_core::gas::build_gas_model;
use tripart_core::milp::{solve_mip, Model, SolverConfig};
use tripart_core::oracle::{compare_solutions, enumerate_mip, DEFAULT_INTEGER_LIMIT};

fn random_array(rng: &mut ChaCha8Rng, shape: (usize, usize, usize), hi: f64) -> ChannelArray {
    let (a, b, c) = shape;
    let mut arr = ChannelArray::zeros(a, b, c);
    for v in &mut arr.data {
        *v = rng.random_range(0.0..hi);
    }
    arr
}

struct Consensus {
    lambda_g: [ChannelArray; 2],
    lambda_e: [ChannelArray; 2],
    ip_g: ChannelArray,
    ip_e: ChannelArray,
}

fn consensus(case: &PlanningCase, seed: u64) -> Consensus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gs = (case.gas.nodes.len(), case.ries.len(), case.horizon);
    let es = (case.electric.buses.len(), case.ries.len(), case.horizon);
    let gcap = case.gas_channel_cap(0);
    let ecap = case.elec_channel_cap(0);
    Consensus {
        lambda_g: [random_array(&mut rng, gs, 1e-5), random_array(&mut rng, gs, 1e-5)],
        lambda_e: [random_array(&mut rng, es, 1e-3), random_array(&mut rng, es, 1e-3)],
        ip_g: random_array(&mut rng, gs, gcap),
        ip_e: random_array(&mut rng, es, ecap),
    }
}

fn models(case: &PlanningCase, c: &Consensus) -> Vec<(&'static str, Model)> {
    let pen = |lambda, ip, rho| Penalty {
        lambda,
        ip,
        rho,
        knots: 8,
    };
    let rho_g = 1e-6;
    let rho_e = 1e-3;
    vec![
        ("gas", build_gas_model(case, AgentMode::JointSlice).unwrap().0),
        ("gas-admm", build_gas_model(case, AgentMode::Admm(pen(&c.lambda_g[0], &c.ip_g, rho_g))).unwrap().0),
        ("electric", build_electric_model(case, AgentMode::JointSlice).unwrap().0),
        (
            "electric-admm",
            build_electric_model(case, AgentMode::Admm(pen(&c.lambda_e[0], &c.ip_e, rho_e))).unwrap().0,
        ),
        ("ries", tripart_core::ries::build_ries_model(case, tripart_core::ries::RiesMode::JointSlice).unwrap().0),
        (
            "ries-admm",
            tripart_core::ries::build_ries_model(
                case,
                tripart_core::ries::RiesMode::Admm {
                    gas: pen(&c.lambda_g[1], &c.ip_g, rho_g),
                    elec: pen(&c.lambda_e[1], &c.ip_e, rho_e),
                },
            )
            .unwrap()
            .0,
        ),
        ("joint", build_joint_model(case).unwrap().model),
    ]
}

/// λ = 1, IP = 0, ρ = 100 on every channel.
fn default_settings(case: &PlanningCase) -> Vec<(&'static str, Model)> {
    let gs = (case.gas.nodes.len(), case.ries.len(), case.horizon);
    let es = (case.electric.buses.len(), case.ries.len(), case.horizon);
    let (lg, le) = (ChannelArray::filled(gs.0, gs.1, gs.2, 1.0), ChannelArray::filled(es.0, es.1, es.2, 1.0));
    let (zg, ze) = (ChannelArray::zeros(gs.0, gs.1, gs.2), ChannelArray::zeros(es.0, es.1, es.2));
    let pen = |lambda, ip| Penalty {
        lambda,
        ip,
        rho: 100.0,
        knots: 8,
    };
    vec![
        ("gas-default", build_gas_model(case, AgentMode::Admm(pen(&lg, &zg))).unwrap().0),
        ("electric-default", build_electric_model(case, AgentMode::Admm(pen(&le, &ze))).unwrap().0),
        (
            "ries-default",
            tripart_core::ries::build_ries_model(
                case,
                tripart_core::ries::RiesMode::Admm {
                    gas: pen(&lg, &zg),
                    elec: pen(&le, &ze),
                },
            )
            .unwrap()
            .0,
        ),
    ]
}

#[test]
fn branch_and_bound_matches_enumeration() {
    let mut checked = 0;
    let mut failures = Vec::new();
    for seed in 1..=8 {
        let case = synth_case(seed, Scale::Tiny);
        let c = consensus(&case, seed);
        let mut all = models(&case, &c);
        all.extend(default_settings(&case));
        for (name, model) in all {
            assert!(model.free_integer_vars().len() <= DEFAULT_INTEGER_LIMIT);
            let bb = solve_mip(&model, &SolverConfig::default()).unwrap();
            let or = enumerate_mip(&model, DEFAULT_INTEGER_LIMIT).unwrap();
            let verdict = compare_solutions(&model, &bb, &or, 1e-6);
            checked += 1;
            if !verdict.pass {
                failures.push(format!("seed {seed} {name}: {verdict}"));
            }
        }
    }
    assert!(checked >= 50);
    assert!(failures.is_empty(), "{failures:#?}");
}
