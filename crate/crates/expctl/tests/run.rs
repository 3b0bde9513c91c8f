use expctl::run::spec_from_manifest;
use expctl::table::{THROUGHPUT_HEADER, TRANSIENT_HEADER};
use expctl::{
    compare, config, read_throughput_csv, recipes, run, Axis, ExpError, ExperimentSpec, Method, Range, Series, Sweep,
    Table, TransientEvent, TransientSettings,
};
use swarm_throughput::{ModelParams, PublisherPolicy};

fn sweep(axis: Axis, from: f64, to: f64, step: f64) -> Option<Sweep> {
    Some(Sweep { axis, range: Range { from, to, step } })
}

fn throughputs(table: &Table) -> Vec<f64> {
    match table {
        Table::Throughput(rows) => rows.iter().map(|r| r.throughput.expect("point succeeded")).collect(),
        Table::Transient(_) => panic!("expected a throughput table"),
    }
}

fn r_squared(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    sxy * sxy / (sxx * syy)
}

#[test]
fn bound_row_for_three_blocks() {
    let spec = ExperimentSpec::new(Method::Bound, ModelParams::new(3, 10));
    let out = run(&spec).unwrap();
    let csv = out.table().to_csv_string();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], THROUGHPUT_HEADER.join(","));
    assert_eq!(lines[1], "bound,3,10,1,1,1,RP_RUB,RP_RUB,false,inf,3,,,,");
    assert_eq!(out.exit_code(), 0);
}

#[test]
fn queueing_throughput_is_linear_in_blocks() {
    let spec = ExperimentSpec {
        sweep: sweep(Axis::Blocks, 2.0, 7.0, 1.0),
        ..ExperimentSpec::new(Method::Queueing, ModelParams::new(3, 10))
    };
    let ys = throughputs(&run(&spec).unwrap().table());
    let xs: Vec<f64> = (2..=7).map(f64::from).collect();
    let r2 = r_squared(&xs, &ys);
    assert!(r2 >= 0.98, "R² = {r2}");
}

#[test]
fn rows_follow_sweep_order() {
    let spec = ExperimentSpec {
        sweep: sweep(Axis::Capacity, 0.25, 2.0, 0.25),
        ..ExperimentSpec::new(Method::Queueing, ModelParams::new(3, 10))
    };
    let Table::Throughput(rows) = run(&spec).unwrap().table() else { panic!() };
    let us: Vec<f64> = rows.iter().map(|r| r.params.publisher_capacity).collect();
    assert_eq!(us, (1..=8).map(|i| i as f64 * 0.25).collect::<Vec<_>>());
}

#[test]
fn method_against_itself_has_zero_error() {
    let spec = ExperimentSpec {
        sweep: sweep(Axis::Peers, 2.0, 8.0, 2.0),
        ..ExperimentSpec::new(Method::Markov, ModelParams::new(3, 2))
    };
    let a = Series::new(Axis::Peers, run(&spec).unwrap().table()).unwrap();
    let rows = compare(&a, &a).unwrap();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r.rel_error == Some(0.0) && r.abs_diff == Some(0.0)));
}

#[test]
fn simulation_intervals_cover_exact_values() {
    // K = 2, N = 5 across publisher capacities
    let params = ModelParams::new(2, 5).with_policies(PublisherPolicy::RpRfb, swarm_throughput::PeerPolicy::RpRub);
    let axis = sweep(Axis::Capacity, 0.25, 2.5, 0.25);
    let exact = ExperimentSpec { sweep: axis, ..ExperimentSpec::new(Method::Markov, params.clone()) };
    let mut sim = ExperimentSpec { sweep: axis, ..ExperimentSpec::new(Method::Simulate, params) };
    sim.sim.seed = 11;
    sim.sim.horizon = 2000.0;
    sim.sim.warmup = 100.0;
    sim.sim.replications = 20;
    let a = Series::new(Axis::Capacity, run(&sim).unwrap().table()).unwrap();
    let b = Series::new(Axis::Capacity, run(&exact).unwrap().table()).unwrap();
    let rows = compare(&a, &b).unwrap();
    assert_eq!(rows.len(), 10);
    let covered = rows.iter().filter(|r| r.abs_diff.unwrap() <= r.ci_halfwidth_a.unwrap()).count();
    assert!(covered * 10 >= rows.len() * 9, "{covered}/{} covered", rows.len());
}

#[test]
fn queueing_estimates_exact_plateau_when_publisher_is_slower() {
    let params = ModelParams::new(3, 10)
        .with_capacity(0.5)
        .with_policies(PublisherPolicy::MdpRfb, swarm_throughput::PeerPolicy::RpRub);
    let axis = sweep(Axis::Peers, 10.0, 30.0, 10.0);
    let exact = ExperimentSpec { sweep: axis, ..ExperimentSpec::new(Method::Markov, params.clone()) };
    let approx = ExperimentSpec { sweep: axis, ..ExperimentSpec::new(Method::Queueing, params) };
    let a = Series::new(Axis::Peers, run(&exact).unwrap().table()).unwrap();
    let b = Series::new(Axis::Peers, run(&approx).unwrap().table()).unwrap();
    let rows = compare(&a, &b).unwrap();
    let last = rows.last().unwrap();
    assert_eq!(last.axis_value, 30.0);
    assert!(last.rel_error.unwrap() <= 0.10, "{last:?}");
}

#[test]
fn different_axes_do_not_join() {
    let a = ExperimentSpec {
        sweep: sweep(Axis::Peers, 2.0, 4.0, 1.0),
        ..ExperimentSpec::new(Method::Markov, ModelParams::new(2, 2))
    };
    let b = ExperimentSpec {
        sweep: sweep(Axis::Capacity, 1.0, 2.0, 1.0),
        ..ExperimentSpec::new(Method::Bound, ModelParams::new(2, 2))
    };
    let a = Series::new(Axis::Peers, run(&a).unwrap().table()).unwrap();
    let b = Series::new(Axis::Capacity, run(&b).unwrap().table()).unwrap();
    assert!(matches!(compare(&a, &b), Err(ExpError::AxisMismatch { .. })));
}

#[test]
fn population_sweep_rises_then_settles() {
    let mut spec = ExperimentSpec {
        sweep: sweep(Axis::Peers, 2.0, 200.0, 18.0),
        ..ExperimentSpec::new(
            Method::Simulate,
            ModelParams::new(3, 2).with_policies(PublisherPolicy::MdpRfb, swarm_throughput::PeerPolicy::RpRub),
        )
    };
    spec.sim.seed = 3;
    spec.sim.horizon = 1000.0;
    spec.sim.warmup = 100.0;
    spec.sim.replications = 6;
    let out = run(&spec).unwrap();
    let ys = throughputs(&out.table());
    let curve = out.population_curve().unwrap();
    let peak_index = ys.iter().position(|&y| y == curve.peak).unwrap();
    assert!(peak_index > 0 && peak_index + 3 < ys.len(), "peak at index {peak_index}: {ys:?}");
    assert!(ys[..=peak_index].windows(2).all(|w| w[1] > w[0]), "{ys:?}");
    let tail = &ys[ys.len() - 3..];
    let plateau = tail.iter().sum::<f64>() / 3.0;
    assert!(plateau < 0.8 * curve.peak, "{ys:?}");
    assert!(tail.iter().all(|y| (y - plateau).abs() < 0.1 * plateau), "{ys:?}");
    let manifest = out.manifest();
    let annotated = manifest["population_curve"]["plateau_lambda_s"].as_f64().unwrap();
    assert_eq!(annotated, *ys.last().unwrap());
}

#[test]
fn failed_points_keep_their_rows() {
    // the second point's end-game queue is too long to truncate
    let params = ModelParams::new(3, 10).with_endgame_rate(0.01);
    let spec = ExperimentSpec {
        sweep: sweep(Axis::Capacity, 1.0, 100.0, 99.0),
        ..ExperimentSpec::new(Method::Queueing, params)
    };
    let out = run(&spec).unwrap();
    let Table::Throughput(rows) = out.table() else { panic!() };
    assert_eq!(rows.len(), 2);
    assert!(rows[0].throughput.is_some());
    assert!(rows[1].throughput.is_none());
    assert_eq!(out.exit_code(), 3);
    let manifest = out.manifest();
    assert_eq!(manifest["points"][0]["status"], "ok");
    assert_eq!(manifest["points"][1]["status"], "numerical_failure");
    assert!(manifest["points"][1]["error"].as_str().unwrap().contains("unstable"));
}

#[test]
fn csv_round_trips_through_the_reader() {
    let mut spec = ExperimentSpec {
        sweep: sweep(Axis::Peers, 2.0, 6.0, 2.0),
        ..ExperimentSpec::new(Method::Simulate, ModelParams::new(2, 2).with_capacity(1.0 / 3.0))
    };
    spec.sim.replications = 3;
    spec.sim.horizon = 100.0;
    spec.sim.warmup = 10.0;
    let table = run(&spec).unwrap().table();
    let text = table.to_csv_string();
    let back = read_throughput_csv(text.as_bytes()).unwrap();
    assert_eq!(Table::Throughput(back.clone()).to_csv_string(), text);
    assert_eq!(back[0].params.publisher_capacity, 0.333333333333);
    assert!(text.contains(",0.333333333333,"));

    let bad = text.replacen("throughput", "rate", 1);
    assert!(matches!(read_throughput_csv(bad.as_bytes()), Err(ExpError::Csv { line: 1, .. })));
    let bad = text.replacen("RP_RUB", "XX", 1);
    assert!(matches!(read_throughput_csv(bad.as_bytes()), Err(ExpError::Csv { line: 2, .. })));
}

#[test]
fn transient_table_has_one_row_per_grid_time() {
    let mut spec = ExperimentSpec::new(Method::Transient, ModelParams::new(3, 6));
    spec.transient = Some(TransientSettings {
        event: TransientEvent::Enter,
        fraction: 0.5,
        grid: Range { from: 0.0, to: 40.0, step: 10.0 },
    });
    spec.sim.horizon = 40.0;
    spec.sim.replications = 50;
    let out = run(&spec).unwrap();
    let csv = out.table().to_csv_string();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], TRANSIENT_HEADER.join(","));
    assert_eq!(lines.len(), 6);
    let cdf: Vec<f64> = lines[1..].iter().map(|l| l.split(',').nth(13).unwrap().parse().unwrap()).collect();
    assert_eq!(cdf[0], 0.0);
    assert!(cdf.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn manifest_replays_bit_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = ExperimentSpec {
        sweep: sweep(Axis::Peers, 3.0, 9.0, 3.0),
        ..ExperimentSpec::new(Method::Simulate, ModelParams::new(3, 3).with_capacity(0.7))
    };
    spec.sim.seed = 123;
    spec.sim.horizon = 300.0;
    spec.sim.warmup = 30.0;
    spec.sim.replications = 5;
    let path = dir.path().join("nested").join("sim.csv");
    let manifest_path = run(&spec).unwrap().write(&path).unwrap();
    assert_eq!(manifest_path, dir.path().join("nested").join("sim.manifest.json"));

    let manifest = std::fs::read_to_string(&manifest_path).unwrap();
    let replayed = spec_from_manifest(&manifest).unwrap();
    assert_eq!(replayed, spec);
    let again = run(&replayed).unwrap().table().to_csv_string();
    assert_eq!(again, std::fs::read_to_string(&path).unwrap());

    let json: serde_json::Value = serde_json::from_str(&manifest).unwrap();
    assert_eq!(json["toolkit"], "expctl");
    assert_eq!(json["seeds"][0], 123);
    assert_eq!(json["points"].as_array().unwrap().len(), 3);
    assert_eq!(json["points"][2]["rows"], serde_json::json!([2, 3]));
}

#[test]
fn every_recipe_is_valid() {
    for recipe in recipes::RECIPES {
        let specs = recipe.specs().unwrap_or_else(|e| panic!("{}: {e}", recipe.name));
        assert!(!specs.is_empty());
        let transient = specs[0].1.method == Method::Transient;
        for (curve, spec) in &specs {
            assert_eq!(spec.method == Method::Transient, transient, "{}/{curve} mixes table kinds", recipe.name);
            assert_eq!(config::parse(&config::render(spec)).unwrap(), *spec);
        }
        for (_, text) in recipe.curves {
            assert!(text.lines().any(|l| l.starts_with("# assumption:")), "{} pins nothing", recipe.name);
        }
    }
    assert_eq!(recipes::RECIPES.len(), 14);
    assert!(matches!(recipes::find("fig4"), Err(ExpError::UnknownRecipe(_))));
}

#[test]
fn analytic_recipes_converge() {
    for name in ["fig6a", "fig6b", "fig7a", "fig7b"] {
        for (curve, spec) in recipes::find(name).unwrap().specs().unwrap() {
            let out = run(&spec).unwrap();
            assert_eq!(out.exit_code(), 0, "{name}/{curve}");
        }
    }
    let fig6b = &recipes::find("fig6b").unwrap().specs().unwrap()[0].1;
    let ys = throughputs(&run(fig6b).unwrap().table());
    let xs: Vec<f64> = fig6b.sweep.unwrap().points();
    assert!(r_squared(&xs, &ys) >= 0.98);
}
