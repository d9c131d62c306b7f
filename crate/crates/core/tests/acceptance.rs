//! Acceptance criteria 1-10. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use hqdetect::classical::{argmax, metrics_from_cm, ConfusionMatrix};
use hqdetect::hybrid::{Composition, EncodingKind, HeadConfig};
use hqdetect::pipeline::{
    assemble_pipeline, classify, layer_dataset, run_pipeline, train_layer, ConstantModel, LayerSpec, PipelineConfig,
    Stage,
};
use hqdetect::quantum::density::swap_trick_purity;
use hqdetect::quantum::linalg::{self, CMatrix};
use hqdetect::quantum::random::{random_density, random_hermitian, random_state, random_unitary};
use hqdetect::quantum::state::ry_matrix;
use hqdetect::quantum::{
    apply_circuit, channel_adjoint_apply, channel_apply, expectation, resource_counts, DensityOperator, Gate,
    Observable, ParameterizedCircuit, QuantumChannel, QuantumState,
};
use hqdetect::telemetry::{generate_dataset, train_test_split, GeneratorSpec, MasterTelemetryRecord};
use hqdetect::train::{
    adjoint_backprop_grad, finite_difference_grad, parameter_shift_grad, train_commutator, ChannelLayer,
    ChannelNetwork, TargetProjector, TrainConfig, TunableUnitary, UnitaryLayer, UnitaryNetwork, DEFAULT_FD_STEP,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn c1_metric_oracle() -> Outcome {
    let m = metrics_from_cm(&ConfusionMatrix::binary(1145, 23, 84, 1748)).unwrap();
    let exact = [2893.0 / 3000.0, 1748.0 / 1771.0, 1748.0 / 1832.0];
    let got = [m.accuracy, m.per_class[1].precision, m.per_class[1].recall];
    let published = [0.96433, 0.98701, 0.95415];
    let arith_ok = got.iter().zip(&exact).all(|(g, e)| (g - e).abs() <= 1e-5);
    let paper_ok = got.iter().zip(&published).all(|(g, p)| (g - p).abs() <= 1e-5);

    let p = metrics_from_cm(&ConfusionMatrix::binary(2229, 0, 0, 771)).unwrap();
    let mut perfect = vec![p.accuracy, p.macro_f1, p.weighted_f1];
    for c in &p.per_class {
        perfect.extend([c.precision, c.recall, c.f1]);
    }
    let perfect_ok = perfect.iter().all(|&v| v == 1.0);
    outcome(
        arith_ok && paper_ok && perfect_ok,
        format!(
            "accuracy {:.6} precision {:.6} recall {:.6}; perfect matrix all 1.0: {perfect_ok}",
            got[0], got[1], got[2]
        ),
    )
}

fn random_circuit(rng: &mut ChaCha8Rng, qubits: usize, layers: usize) -> ParameterizedCircuit {
    let mut c = ParameterizedCircuit::new(qubits);
    for _ in 0..layers {
        for q in 0..qubits {
            c.push(Gate::ry(q, rng.random_range(-PI..PI))).unwrap();
            c.push(Gate::rz(q, rng.random_range(-PI..PI))).unwrap();
        }
        for q in 0..qubits.saturating_sub(1) {
            c.push(if rng.random_bool(0.5) { Gate::cnot(q, q + 1) } else { Gate::cz(q, q + 1) }).unwrap();
        }
    }
    c
}

fn trace_of_product(a: &CMatrix, b: &CMatrix) -> Complex64 {
    let mut t = Complex64::new(0.0, 0.0);
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            t += a[(i, k)] * b[(k, i)];
        }
    }
    t
}

fn c2_quantum_identities() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut norm_err, mut trace_err, mut adj_err, mut swap_err) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..100 {
        let q = rng.random_range(1..=4);
        let layers = rng.random_range(1..=3);
        let circuit = random_circuit(&mut rng, q, layers);
        let psi = random_state(q, &mut rng);
        let out = apply_circuit(&psi, &circuit).unwrap();
        let n2: f64 = out.amplitudes().iter().map(|a| a.norm_sqr()).sum();
        norm_err = norm_err.max((n2.sqrt() - 1.0).abs());

        let (s, a) = (rng.random_range(1..=2), rng.random_range(0..=2));
        let ch = QuantumChannel::new(random_unitary(1 << (s + a), &mut rng), s, a).unwrap();
        let rho = random_density(s, &mut rng);
        let out = channel_apply(&ch, &rho).unwrap();
        let tr: Complex64 = (0..out.dim()).map(|i| out.matrix()[(i, i)]).sum();
        trace_err = trace_err.max((tr - 1.0).norm());

        let obs = Observable::new(random_hermitian(1 << s, &mut rng), "A").unwrap();
        let lhs = trace_of_product(obs.matrix(), out.matrix());
        let back = channel_adjoint_apply(&ch, &obs).unwrap();
        let rhs = trace_of_product(back.matrix(), rho.matrix());
        adj_err = adj_err.max((lhs - rhs).norm());

        let x = random_density(rng.random_range(1..=3), &mut rng);
        let direct = trace_of_product(x.matrix(), x.matrix()).re;
        swap_err = swap_err.max((swap_trick_purity(&x) - direct).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    let worst = norm_err.max(trace_err).max(adj_err).max(swap_err);
    outcome(
        worst <= 1e-10 && secs < 10.0,
        format!(
            "max errors: norm {norm_err:.1e} trace {trace_err:.1e} adjoint {adj_err:.1e} swap {swap_err:.1e}; {secs:.2}s"
        ),
    )
}

fn c3_gradients() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let q = rng.random_range(1..=3);
        let layers = rng.random_range(1..=3);
        let circuit = random_circuit(&mut rng, q, layers);
        let input = random_state(q, &mut rng);
        let obs = Observable::z(rng.random_range(0..q), q).unwrap();
        let ps = parameter_shift_grad(&circuit, &input, &obs).unwrap().values;
        let net = ChannelNetwork::new(vec![ChannelLayer::new(circuit.clone(), q, 0).unwrap()]).unwrap();
        let adj = adjoint_backprop_grad(&net, &DensityOperator::from_state(&input), &obs).unwrap().values;
        let fd = finite_difference_grad(
            |t| expectation(&apply_circuit(&input, &circuit.with_parameters(t).unwrap()).unwrap(), &obs).unwrap(),
            &circuit.parameters(),
            DEFAULT_FD_STEP,
        );
        for i in 0..ps.len() {
            worst = worst.max((ps[i] - adj[i]).abs()).max((ps[i] - fd[i]).abs()).max((adj[i] - fd[i]).abs());
        }
    }
    let z = Observable::z(0, 1).unwrap();
    let mut analytic = 0.0f64;
    for theta in [0.0, 0.4, 1.1, PI / 2.0, 2.5, -0.8] {
        let c = ParameterizedCircuit::new(1).with_gate(Gate::ry(0, theta)).unwrap();
        let ps = parameter_shift_grad(&c, &QuantumState::zero(1), &z).unwrap().values[0];
        let net = ChannelNetwork::new(vec![ChannelLayer::new(c, 1, 0).unwrap()]).unwrap();
        let adj = adjoint_backprop_grad(&net, &DensityOperator::from_state(&QuantumState::zero(1)), &z).unwrap().values[0];
        analytic = analytic.max((ps + theta.sin()).abs()).max((adj + theta.sin()).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst <= 1e-6 && analytic <= 1e-10 && secs < 30.0,
        format!("max pairwise gap {worst:.1e}; -sin case error {analytic:.1e}; {secs:.2}s"),
    )
}

fn c4_commutator() -> Outcome {
    let start = Instant::now();
    let layer = UnitaryLayer::new(1, 0, vec![TunableUnitary { support: vec![0], matrix: ry_matrix(0.5) }]).unwrap();
    let net = UnitaryNetwork::new(vec![layer]).unwrap();
    let batch = vec![(
        DensityOperator::from_state(&QuantumState::zero(1)),
        TargetProjector::pure(&QuantumState::basis(1, 1).unwrap()),
    )];
    let report = train_commutator(&net, &batch, &TrainConfig { epochs: 200, ..Default::default() }).unwrap();
    let h = &report.fidelity_history;
    let monotone = h.windows(2).all(|w| w[1] >= w[0] - 1e-9);
    let reached = h.iter().position(|&f| f >= 0.99);
    let final_defect = report.network.gate_matrices().map(linalg::unitary_defect).fold(0.0, f64::max);
    let secs = start.elapsed().as_secs_f64();
    outcome(
        reached.is_some() && monotone && report.max_unitary_defect <= 1e-8 && final_defect <= 1e-8 && secs < 5.0,
        format!(
            "fidelity {:.6} after {} updates, 0.99 reached at update {:?}, monotone {monotone}, max unitarity defect {:.1e}; {secs:.2}s",
            h.last().unwrap(),
            h.len() - 1,
            reached,
            report.max_unitary_defect
        ),
    )
}

fn c5_resources() -> Outcome {
    let copies = resource_counts(1, &[1, 2, 1], &[2, 2, 2]).unwrap().n_copies;
    let tomo = resource_counts(1, &[0, 1], &[2, 2]).unwrap().n_tomography;
    let (want_copies, want_tomo) = (2 * (4u64.pow(2) - 1) + (4u64.pow(3) - 1), 2 * (4u64.pow(2) - 1));
    outcome(
        copies == 93 && want_copies == 93 && tomo == 30 && want_tomo == 30,
        format!("n_copies {copies} (expected 93), n_tomography {tomo} (expected 30)"),
    )
}

fn c6_gating() -> Outcome {
    let binary = |flag: bool| ConstantModel(if flag { vec![0.1, 0.9] } else { vec![0.9, 0.1] });
    let record = MasterTelemetryRecord::baseline();
    let mut mismatches = 0;
    let mut cases = 0;
    for f1 in [false, true] {
        for f2 in [false, true] {
            for k in 0..6 {
                let mut p3 = [0.1; 6];
                p3[k] = 0.5;
                let total: f64 = p3.iter().sum();
                let p3: Vec<f64> = p3.iter().map(|v| v / total).collect();
                let p = assemble_pipeline(
                    Box::new(binary(f1)),
                    Box::new(binary(f2)),
                    Box::new(ConstantModel(p3)),
                    PipelineConfig::default(),
                )
                .unwrap();
                let got = classify(&p, &record).unwrap();
                let expected = if !f1 || !f2 { 0 } else { k };
                let stage = match (f1, f2) {
                    (false, _) => Stage::L1Clear,
                    (true, false) => Stage::L2Clear,
                    (true, true) => Stage::L3Classified,
                };
                cases += 1;
                if got.final_label != expected || got.stage != stage {
                    mismatches += 1;
                }
            }
        }
    }
    outcome(mismatches == 0 && cases == 24, format!("{cases} cases, {mismatches} mismatches"))
}

fn held_out_accuracy(train: &[hqdetect::telemetry::LabeledSample], test: &[hqdetect::telemetry::LabeledSample], layer: u8, encoding: EncodingKind, seed: u64) -> f64 {
    let spec = LayerSpec { encoding, composition: Composition::Serial, seed, ..Default::default() };
    assert!(matches!(spec.head, HeadConfig::Forest(_)));
    let model = train_layer(train, layer, &spec).unwrap();
    let (x, y) = layer_dataset(test, layer).unwrap();
    let correct = x
        .iter()
        .zip(&y)
        .filter(|(x, &y)| argmax(&hqdetect::pipeline::LayerModel::predict_proba(&model, x).unwrap()) == y)
        .count();
    correct as f64 / y.len() as f64
}

fn single_threaded<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(f)
}

fn c7_trend() -> Outcome {
    let start = Instant::now();
    let (full, amp3) = single_threaded(|| {
        let data = generate_dataset(&GeneratorSpec { n_samples: 3000, seed: 42, ..Default::default() }).unwrap();
        let (train, test) = train_test_split(&data, 0.7, 42).unwrap();
        (
            held_out_accuracy(&train, &test, 3, EncodingKind::Full, 42),
            held_out_accuracy(&train, &test, 3, EncodingKind::Amplitude(3), 42),
        )
    });
    let secs = start.elapsed().as_secs_f64();
    outcome(
        full >= 0.95 && full - amp3 >= 0.05 && secs < 300.0,
        format!("Full+RF {full:.4} (need >= 0.95), Amplitude3+RF {amp3:.4}, gap {:.4} (need >= 0.05); {secs:.1}s", full - amp3),
    )
}

fn c8_anomaly() -> Outcome {
    let start = Instant::now();
    let spec = GeneratorSpec { n_samples: 3000, seed: 42, delta: 0.3, sigma: 0.08, rho: 0.0, ..Default::default() };
    let data = generate_dataset(&spec).unwrap();
    let (train, test) = train_test_split(&data, 0.7, 42).unwrap();
    let acc = held_out_accuracy(&train, &test, 1, EncodingKind::None, 42);
    let secs = start.elapsed().as_secs_f64();
    outcome(acc >= 0.99 && secs < 60.0, format!("Layer-1 RF held-out accuracy {acc:.4} (need >= 0.99); {secs:.1}s"))
}

fn c9_pipeline() -> Outcome {
    let start = Instant::now();
    let data = generate_dataset(&GeneratorSpec { n_samples: 3000, seed: 42, rho: 0.05, ..Default::default() }).unwrap();
    let (train, test) = train_test_split(&data, 0.7, 42).unwrap();
    let spec = LayerSpec { seed: 42, ..Default::default() };
    let models = hqdetect::pipeline::train_pipeline_models(&train, &[spec.clone(), spec.clone(), spec]).unwrap();
    let p = models.into_pipeline(PipelineConfig::default()).unwrap();
    let (outcomes, summary) = run_pipeline(&p, &test).unwrap();
    let partition = summary.stage_counts.iter().sum::<usize>() == test.len() && outcomes.len() == test.len();
    let normals: Vec<_> = test.iter().zip(&outcomes).filter(|(s, _)| s.attack_class == 0).collect();
    let cleared = normals.iter().filter(|(_, o)| o.stage == Stage::L1Clear).count() as f64 / normals.len() as f64;
    let diag = summary.confusion.trace() as f64 / summary.confusion.total() as f64;
    let secs = start.elapsed().as_secs_f64();
    outcome(
        partition && cleared >= 0.90 && diag >= 0.90 && secs < 120.0,
        format!(
            "stages {:?} over {} records, Normal at L1-clear {cleared:.4}, trace/total {diag:.4}; {secs:.1}s",
            summary.stage_counts,
            test.len()
        ),
    )
}

fn hqdetect(dir: &Path, args: &[&str]) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_hqdetect")).current_dir(dir).args(args).output().unwrap();
    assert!(out.status.success(), "hqdetect {args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out.stdout
}

fn artifacts(root: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else if path.file_name().unwrap() != "timing.json" {
                files.push((path.strip_prefix(root).unwrap().display().to_string(), std::fs::read(&path).unwrap()));
            }
        }
    }
    files.sort();
    files
}

fn c10_determinism() -> Outcome {
    let config = "n = 400\nseed = 11\nlayers = 1,3\nencodings = none,partial,amplitude3\ncompositions = serial,parallel\nheads = rf,mlp\nrf_trees = 20\nmlp_epochs = 30\n";
    let commands: [&[&str]; 5] = [
        &["gen", "--config", "exp.cfg"],
        &["train-eval", "--config", "exp.cfg"],
        &["pipeline", "--config", "exp.cfg"],
        &["export-latent", "--config", "exp.cfg", "--encoding", "full"],
        &["resources", "--n-proj", "1", "--m", "1,2,1", "--d", "2,2,2"],
    ];
    let mut runs = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("exp.cfg"), config).unwrap();
        let stdout: Vec<Vec<u8>> = commands.iter().map(|args| hqdetect(dir.path(), args)).collect();
        runs.push((artifacts(&dir.path().join("runs")), stdout));
    }
    let files = runs[0].0.len();
    let same = runs[0] == runs[1];
    outcome(same && files > 0, format!("{files} artifacts and 5 command outputs compared, identical: {same}"))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("metric oracle vs published counts", c1_metric_oracle),
        ("quantum identity suite", c2_quantum_identities),
        ("gradient suite", c3_gradients),
        ("commutator toy task", c4_commutator),
        ("resource formulas", c5_resources),
        ("gating equivalence", c6_gating),
        ("trend reproduction (Full vs Amplitude3)", c7_trend),
        ("anomaly layer", c8_anomaly),
        ("end-to-end pipeline", c9_pipeline),
        ("determinism", c10_determinism),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        println!("ACCEPTANCE {:>2} {}: {}: {}", i + 1, if o.pass { "PASS" } else { "FAIL" }, name, o.detail);
        if !o.pass {
            failed.push(i + 1);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all 10 criteria pass");
    } else {
        println!("acceptance: failing criteria {failed:?}");
        std::process::exit(1);
    }
}
