//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! run with `--nocapture` to see them when everything passes.

use std::time::{Duration, Instant};

use duallqr::controllers::{step_dual, step_single};
use duallqr::demos::{load_set, save_set, synth_demos, SynthSpec};
use duallqr::geometry::rotation_from_euler;
use duallqr::harness::{
    accuracy_by_rho, default_plan, rho_grid, summarize, sweep, write_rows, AmplitudeLevel, Condition, SweepPlan,
};
use duallqr::lqr::{control_finite, fit_finite_with_precisions, gain_infinite};
use duallqr::mixture::{
    fit_demo_set, gaussian_product, load_model, save_model, EmOptions, ModelFile, TransformedGaussian,
};
use duallqr::regression::activations;
use duallqr::sim::{run_episode, Axis, EpisodeConfig, OscillationSpec};
use duallqr::{
    fuse_controls, gmr, prepare, CostSpec, DemoSet, FrameTransform, GaussianComponent, Gmm, JointGmm, Method, Pose6,
    StepContext, SystemModel,
};
use nalgebra::{DMatrix, DVector, Matrix6, Vector6};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

const DEMOS: usize = 40;
const SEED: u64 = 0;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn demo_set() -> DemoSet {
    synth_demos(DEMOS, SEED, &SynthSpec::default()).unwrap()
}

fn fit(set: &DemoSet) -> JointGmm {
    fit_demo_set(set, 6, SEED, &EmOptions::default()).unwrap().model
}

fn random_spd(r: &mut ChaCha8Rng, n: usize, ridge: f64) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| r.random_range(-1.0..1.0));
    &g * g.transpose() + DMatrix::identity(n, n) * ridge
}

fn random_pose(r: &mut ChaCha8Rng) -> Pose6 {
    Pose6::from_array(std::array::from_fn(|i| {
        if i < 3 {
            r.random_range(-1.0..1.0)
        } else {
            r.random_range(-3.0..3.0)
        }
    }))
}

// Oracle linear algebra: row-major Gauss-Jordan with partial pivoting.

fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

fn gj_inverse(m: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = m.len();
    let mut a: Vec<Vec<f64>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    for c in 0..n {
        let p = (c..n).max_by(|&x, &y| a[x][c].abs().total_cmp(&a[y][c].abs())).unwrap();
        a.swap(c, p);
        let piv = a[c][c];
        for v in a[c].iter_mut() {
            *v /= piv;
        }
        for r in 0..n {
            if r != c {
                let f = a[r][c];
                if f != 0.0 {
                    for k in 0..2 * n {
                        a[r][k] -= f * a[c][k];
                    }
                }
            }
        }
    }
    a.into_iter().map(|r| r[n..].to_vec()).collect()
}

fn mat_mul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    (0..a.len())
        .map(|i| {
            (0..b[0].len())
                .map(|j| (0..b.len()).map(|k| a[i][k] * b[k][j]).sum())
                .collect()
        })
        .collect()
}

fn mat_vec(a: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    a.iter().map(|r| r.iter().zip(v).map(|(x, y)| x * y).sum()).collect()
}

fn transpose(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    (0..a[0].len()).map(|j| a.iter().map(|r| r[j]).collect()).collect()
}

/// Product of two transformed Gaussians, summed in information form.
fn product_oracle(inputs: &[(Vec<f64>, Vec<Vec<f64>>, Vec<Vec<f64>>, Vec<f64>)]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = inputs[0].2.len();
    let mut lam = vec![vec![0.0; n]; n];
    let mut eta = vec![0.0; n];
    for (mean, cov, a, b) in inputs {
        let s = mat_mul(&mat_mul(a, cov), &transpose(a));
        let l = gj_inverse(&s);
        let m: Vec<f64> = mat_vec(a, mean).iter().zip(b).map(|(x, y)| x + y).collect();
        let lm = mat_vec(&l, &m);
        for i in 0..n {
            eta[i] += lm[i];
            for j in 0..n {
                lam[i][j] += l[i][j];
            }
        }
    }
    let cov = gj_inverse(&lam);
    (mat_vec(&cov, &eta), cov)
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut r = rng(1);
    let mut worst: f64 = 0.0;
    for case in 0..1000 {
        let dim = if case % 2 == 0 { 3 } else { 7 };
        let mut owned = Vec::new();
        for _ in 0..2 {
            let mean = DVector::from_fn(dim, |_, _| r.random_range(-1.0..1.0));
            let cov = random_spd(&mut r, dim, 0.2);
            let pose = random_pose(&mut r);
            let (a, b) = if dim == 3 {
                let rot = rotation_from_euler(&pose.orientation);
                (
                    DMatrix::from_fn(3, 3, |i, j| rot[(i, j)]),
                    DVector::from_column_slice(pose.position.as_slice()),
                )
            } else {
                let f = FrameTransform::from_pose(&pose).unwrap();
                (
                    DMatrix::from_fn(7, 7, |i, j| f.a()[(i, j)]),
                    DVector::from_column_slice(f.b().as_slice()),
                )
            };
            owned.push((mean, cov, a, b));
        }
        let inputs: Vec<TransformedGaussian<'_>> = owned
            .iter()
            .map(|(mean, covariance, a, b)| TransformedGaussian { mean, covariance, a, b })
            .collect();
        let (mean, cov) = gaussian_product(&inputs).unwrap();
        let plain: Vec<_> = owned
            .iter()
            .map(|(m, c, a, b)| {
                (
                    m.iter().copied().collect(),
                    to_rows(c),
                    to_rows(a),
                    b.iter().copied().collect(),
                )
            })
            .collect();
        let (om, oc) = product_oracle(&plain);
        for i in 0..dim {
            worst = worst.max((mean[i] - om[i]).abs());
            for j in 0..dim {
                worst = worst.max((cov[(i, j)] - oc[i][j]).abs());
            }
        }
    }
    let took = start.elapsed();
    Outcome::new(
        worst <= 1e-9 && took < Duration::from_secs(10),
        format!("max elementwise error {worst:.2e}, {:.2} s", took.as_secs_f64()),
    )
}

/// Conditional of `x | t` for one 7-D component, computed with scalar loops.
fn conditional(c: &GaussianComponent, t: f64) -> (Vec<f64>, Vec<Vec<f64>>) {
    let stt = c.covariance[(0, 0)];
    let mean = (0..6)
        .map(|i| c.mean[1 + i] + c.covariance[(1 + i, 0)] / stt * (t - c.mean[0]))
        .collect();
    let cov = (0..6)
        .map(|i| {
            (0..6)
                .map(|j| c.covariance[(1 + i, 1 + j)] - c.covariance[(1 + i, 0)] * c.covariance[(0, 1 + j)] / stt)
                .collect()
        })
        .collect();
    (mean, cov)
}

fn time_density(c: &GaussianComponent, t: f64) -> f64 {
    let var = c.covariance[(0, 0)];
    c.weight * (-(t - c.mean[0]).powi(2) / (2.0 * var)).exp() / (2.0 * std::f64::consts::PI * var).sqrt()
}

fn scaled_component(r: &mut ChaCha8Rng, weight: f64, time_mean: f64, time_scale: f64) -> GaussianComponent {
    let mut covariance = random_spd(r, 7, 0.05) * 0.1;
    for k in 0..7 {
        covariance[(0, k)] *= time_scale;
        covariance[(k, 0)] *= time_scale;
    }
    let mut mean = DVector::from_fn(7, |_, _| r.random_range(-0.5..0.5));
    mean[0] = time_mean;
    GaussianComponent {
        weight,
        mean,
        covariance,
    }
}

fn criterion_2() -> Outcome {
    let mut r = rng(2);
    let mut notes = Vec::new();

    let single = Gmm::new(vec![scaled_component(&mut r, 1.0, 100.0, 60.0)]).unwrap();
    let mut exact_err: f64 = 0.0;
    for t in [0.0, 37.5, 100.0, 163.0, 250.0] {
        let est = gmr(&single, t);
        let (m, c) = conditional(&single.components()[0], t);
        for i in 0..6 {
            exact_err = exact_err.max((est.mean[i] - m[i]).abs());
            for j in 0..6 {
                exact_err = exact_err.max((est.covariance[(i, j)] - c[i][j]).abs());
            }
        }
    }
    let exact_ok = exact_err <= 1e-12;
    notes.push(format!("K=1 error {exact_err:.1e}"));

    let comps = vec![
        scaled_component(&mut r, 0.3, 40.0, 30.0),
        scaled_component(&mut r, 0.45, 100.0, 30.0),
        scaled_component(&mut r, 0.25, 160.0, 30.0),
    ];
    let fixture = Gmm::new(comps).unwrap();
    let t = 85.0;
    let dens: Vec<f64> = fixture.components().iter().map(|c| time_density(c, t)).collect();
    let total: f64 = dens.iter().sum();
    let h: Vec<f64> = dens.iter().map(|d| d / total).collect();
    let conds: Vec<(Vector6<f64>, Matrix6<f64>)> = fixture
        .components()
        .iter()
        .map(|c| {
            let (m, s) = conditional(c, t);
            let cov = Matrix6::from_fn(|i, j| s[i][j]);
            (Vector6::from_iterator(m), cov.cholesky().unwrap().l())
        })
        .collect();
    let n = 1_000_000;
    let mut sum = Vector6::<f64>::zeros();
    let mut sq = Vector6::<f64>::zeros();
    let mut mc = rng(22);
    for _ in 0..n {
        let u: f64 = mc.random();
        let mut k = 0;
        let mut acc = h[0];
        while u >= acc && k + 1 < h.len() {
            k += 1;
            acc += h[k];
        }
        let z = Vector6::from_fn(|_, _| mc.sample::<f64, _>(StandardNormal));
        let x = conds[k].0 + conds[k].1 * z;
        sum += x;
        sq += x.component_mul(&x);
    }
    let mc_mean = sum / n as f64;
    let est = gmr(&fixture, t);
    let mut worst_z: f64 = 0.0;
    for d in 0..6 {
        let var = sq[d] / n as f64 - mc_mean[d] * mc_mean[d];
        let se = (var / n as f64).sqrt();
        worst_z = worst_z.max((est.mean[d] - mc_mean[d]).abs() / se);
    }
    let mc_ok = worst_z <= 3.0;
    notes.push(format!("K=3 worst deviation {worst_z:.2} standard errors"));

    let model = fit(&demo_set());
    let mut norm_err: f64 = 0.0;
    let times = [-1e6, -50.0, 0.0, 1.0, 57.3, 100.0, 199.0, 200.0, 350.0, 1e6];
    for gmm in [model.gmm(), &fixture] {
        for &t in &times {
            norm_err = norm_err.max((activations(gmm, t).iter().sum::<f64>() - 1.0).abs());
        }
    }
    let norm_ok = norm_err <= 1e-12;
    notes.push(format!("activation sum error {norm_err:.1e}"));
    Outcome::new(exact_ok && mc_ok && norm_ok, notes.join(", "))
}

fn criterion_3() -> Outcome {
    let horizon = 500;
    let model = SystemModel::default();
    let cost = CostSpec::new(0.0).unwrap();
    let (dt, rr) = (model.dt(), 1.0);
    let q_diag = [1.0, 10.0, 100.0, 1e3, 1e4, 5.0];
    // Orthogonal change of basis keeps the fixed point diagonal in the rotated frame.
    let basis = random_spd(&mut rng(3), 6, 1.0);
    let u_mat = Matrix6::from_fn(|i, j| basis[(i, j)]).qr().q();
    let q = u_mat * Matrix6::from_diagonal(&Vector6::from_row_slice(&q_diag)) * u_mat.transpose();
    let mu = Vector6::new(0.1, -0.2, 0.3, 0.05, -0.1, 0.2);
    let sched = fit_finite_with_precisions(&vec![mu; horizon], &vec![q; horizon], &cost, &model).unwrap();

    // Scalar fixed point per eigen-direction: dt^2 s^2 - q dt^2 s - q r = 0.
    let k_fixed = Vector6::from_iterator(q_diag.iter().map(|&qi| {
        let s = (qi * dt * dt + (qi * qi * dt.powi(4) + 4.0 * dt * dt * qi * rr).sqrt()) / (2.0 * dt * dt);
        s * dt / (rr + dt * dt * s)
    }));
    let k_oracle = u_mat * Matrix6::from_diagonal(&k_fixed) * u_mat.transpose();
    let gain_err = (sched.kp[0] - k_oracle).amax();

    let mut u_max: f64 = 0.0;
    let mut rho_max: f64 = 0.0;
    for t in 0..horizon - 1 {
        u_max = u_max.max(control_finite(&sched, t, &mu).unwrap().norm());
        let eig = sched.closed_loop(t, &model).complex_eigenvalues();
        rho_max = rho_max.max(eig.iter().map(|z| z.norm()).fold(0.0, f64::max));
    }
    Outcome::new(
        gain_err <= 1e-6 && u_max < 1e-6 && rho_max < 1.0,
        format!("K^P_1 error {gain_err:.1e}, max |u| at reference {u_max:.1e}, max spectral radius {rho_max:.4}"),
    )
}

fn criterion_4() -> Outcome {
    let g = gain_infinite(
        &Matrix6::identity(),
        &CostSpec::new(0.0).unwrap(),
        &SystemModel::new(1.0).unwrap(),
    )
    .unwrap();
    let ep = (g.p - Matrix6::identity() * 1.5).amax();
    let ek = (g.k - Matrix6::identity() * 0.6).amax();
    Outcome::new(
        ep <= 1e-12 && ek <= 1e-12,
        format!("P error {ep:.1e}, K error {ek:.1e}"),
    )
}

/// Copies the end-frame block over the start-frame block so both frames
/// carry the same local model.
fn mirrored(joint: &JointGmm) -> JointGmm {
    let comps = joint
        .gmm()
        .components()
        .iter()
        .map(|c| {
            let src = |i: usize| if i == 0 { 0 } else { 7 + (i - 1) % 6 };
            let mean = DVector::from_fn(13, |i, _| c.mean[src(i)]);
            let covariance = DMatrix::from_fn(13, 13, |i, j| {
                let cross = i != 0 && j != 0 && (i < 7) != (j < 7);
                if cross {
                    0.0
                } else {
                    c.covariance[(src(i), src(j))]
                }
            });
            GaussianComponent {
                weight: c.weight,
                mean,
                covariance,
            }
        })
        .collect();
    JointGmm::new(Gmm::new(comps).unwrap(), 2).unwrap()
}

fn criterion_5(model: &JointGmm) -> Outcome {
    let mut r = rng(5);
    let mut sum_err: f64 = 0.0;
    let mut mean_exact = true;
    for _ in 0..1000 {
        let n = r.random_range(2..5);
        let controls: Vec<Vector6<f64>> = (0..n)
            .map(|_| Vector6::from_fn(|_, _| r.random_range(-1.0..1.0)))
            .collect();
        let covs: Vec<Matrix6<f64>> = (0..n)
            .map(|_| {
                let s = random_spd(&mut r, 6, 0.01);
                Matrix6::from_fn(|i, j| s[(i, j)])
            })
            .collect();
        let fused = fuse_controls(&controls, &covs).unwrap();
        for d in 0..6 {
            sum_err = sum_err.max((fused.weights.iter().map(|w| w[d]).sum::<f64>() - 1.0).abs());
        }
        let same = fuse_controls(&controls[..2], &[covs[0], covs[0]]).unwrap();
        mean_exact &= same.control == (controls[0] + controls[1]) / 2.0;
    }
    let ratio = fuse_controls(
        &[Vector6::repeat(1.0), Vector6::repeat(0.0)],
        &[Matrix6::identity(), Matrix6::identity() * 100.0],
    )
    .unwrap();
    let split_err = (0..6)
        .map(|d| (ratio.weights[0][d] / ratio.weights[1][d] - 100.0).abs() / 100.0)
        .fold(0.0, f64::max);

    let joint = mirrored(model);
    let horizon = duallqr::demos::DEFAULT_HORIZON;
    let dual = prepare(
        Method::DualLqr,
        &joint,
        CostSpec::new(0.0).unwrap(),
        SystemModel::default(),
        horizon,
    )
    .unwrap();
    let single = prepare(
        Method::SingleLqr,
        &joint,
        CostSpec::new(0.0).unwrap(),
        SystemModel::default(),
        horizon,
    )
    .unwrap();
    let f = FrameTransform::from_pose(&Pose6::from_array([0.22, 0.27, -0.26, 0.1, -0.05, 1.46])).unwrap();
    let frames = [f, f];
    let mut dual_err: f64 = 0.0;
    for t in 0..horizon - 1 {
        let x = f.pose_to_global(&random_pose(&mut r));
        let ctx = StepContext {
            t,
            x_global: x,
            frames_now: &frames,
        };
        let (ud, _) = step_dual(&dual, &ctx).unwrap();
        let (us, _) = step_single(&single, &ctx).unwrap();
        dual_err = dual_err.max((ud - us).amax());
    }
    Outcome::new(
        sum_err <= 1e-12 && mean_exact && split_err <= 1e-12 && dual_err <= 1e-12,
        format!(
            "weight sum error {sum_err:.1e}, equal-covariance mean exact {mean_exact}, 100:1 split error {split_err:.1e}, Dual vs Single {dual_err:.1e}"
        ),
    )
}

fn static_plan(methods: Vec<Method>, rhos: Vec<f64>) -> SweepPlan {
    SweepPlan {
        methods,
        rhos,
        axes: Vec::new(),
        levels: Vec::new(),
        include_static: true,
        ..default_plan()
    }
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let model = fit(&demo_set());
    let rows = sweep(&static_plan(Method::ALL.to_vec(), vec![0.0]), &model, 0).unwrap();
    let took = start.elapsed();
    let mut worst = Vec::new();
    for m in Method::ALL {
        let min = rows
            .iter()
            .filter(|r| r.method == m)
            .map(|r| r.accuracy)
            .fold(1.0, f64::min);
        worst.push(format!("{m} min {min:.3}"));
    }
    let min = rows.iter().map(|r| r.accuracy).fold(1.0, f64::min);
    Outcome::new(
        rows.len() == 33 && min >= 0.85 && took < Duration::from_secs(120),
        format!(
            "{} over {} episodes, {:.1} s",
            worst.join(", "),
            rows.len(),
            took.as_secs_f64()
        ),
    )
}

fn criterion_7(model: &JointGmm) -> Outcome {
    let plan = SweepPlan {
        rhos: vec![0.0],
        ..default_plan()
    };
    let rows = sweep(&plan, model, 0).unwrap();
    let high_ori = Condition::Orientation(AmplitudeLevel::High);
    let acc = |m| accuracy_by_rho(&rows, m, high_ori).unwrap()[0].1;
    let (dual_acc, inf_acc) = (acc(Method::DualLqr), acc(Method::InfLqr));
    let gap_ok = dual_acc - inf_acc >= 0.10;

    let report = summarize(&rows).unwrap();
    let levels = [
        Condition::Static,
        Condition::Position(AmplitudeLevel::Low),
        Condition::Position(AmplitudeLevel::Medium),
        Condition::Position(AmplitudeLevel::High),
    ];
    let translation = |m: Method| -> Vec<f64> {
        levels
            .iter()
            .map(|c| report.cells[&(m, *c)][0].1.translation.mean)
            .collect()
    };
    let single = translation(Method::SingleLqr);
    let dual = translation(Method::DualLqr);
    let monotone = single.windows(2).all(|w| w[1] > w[0]);
    let dual_le = dual.iter().zip(&single).all(|(d, s)| d <= s);
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>().join("/");
    Outcome::new(
        gap_ok && monotone && dual_le,
        format!(
            "high orientation accuracy Dual {dual_acc:.3} vs Inf {inf_acc:.3} (gap >= 0.10: {gap_ok}); \
             Single translation {} (monotone: {monotone}); Dual translation {} (<= Single: {dual_le})",
            fmt(&single),
            fmt(&dual)
        ),
    )
}

fn criterion_8(model: &JointGmm) -> Outcome {
    let rows = sweep(&static_plan(vec![Method::DualLqr], rho_grid()), model, 0).unwrap();
    let curve = accuracy_by_rho(&rows, Method::DualLqr, Condition::Static).unwrap();
    let low_ok = curve.iter().filter(|(r, _)| *r <= 0.0).all(|(_, a)| *a >= 0.85);
    let falloff = curve.iter().any(|(r, a)| *r >= 2.7 && *a < 0.85);
    let knee = curve
        .iter()
        .filter(|(_, a)| *a >= 0.85)
        .map(|(r, _)| *r)
        .fold(f64::NEG_INFINITY, f64::max);
    Outcome::new(
        low_ok && falloff,
        format!("accuracy >= 0.85 for all rho <= 0: {low_ok}; falls below at some rho >= 2.7: {falloff}; last passing rho {knee}"),
    )
}

fn criterion_9(set: &DemoSet, model: &JointGmm) -> Outcome {
    let plan = SweepPlan {
        rhos: vec![-1.5, 0.0, 1.5],
        axes: vec![Axis::X, Axis::Yaw],
        levels: vec![AmplitudeLevel::High],
        goals: default_plan().goals[..3].to_vec(),
        seeds: vec![0, 7],
        ..default_plan()
    };
    let csv = |threads| {
        let mut buf = Vec::new();
        write_rows(&sweep(&plan, model, threads).unwrap(), &mut buf).unwrap();
        buf
    };
    let (a, b) = (csv(1), csv(0));
    let csv_same = a == b && a == csv(3);

    let dir = tempfile::tempdir().unwrap();
    save_set(set, &dir.path().join("demos")).unwrap();
    let set_same = load_set(&dir.path().join("demos"), None).unwrap() == *set;
    let model_path = dir.path().join("model.json");
    save_model(&ModelFile::from_model(model, set.fingerprint(), None), &model_path).unwrap();
    let model_same = load_model(&model_path).unwrap().to_model().unwrap() == *model;

    let mut replay_err: f64 = 0.0;
    for method in Method::ALL {
        let pc = prepare(
            method,
            model,
            CostSpec::new(0.0).unwrap(),
            SystemModel::default(),
            plan.horizon,
        )
        .unwrap();
        let config = EpisodeConfig {
            oscillation: OscillationSpec::new(Axis::Roll, 0.3, 0.5, 0.0, 0.0).unwrap(),
            seed: 3,
            ..plan.episode_config(&plan.episodes()[0])
        };
        let log = run_episode(&pc, &config).unwrap();
        for (p, q) in log.poses().iter().zip(log.replay()) {
            replay_err = replay_err.max((p.to_vector() - q.to_vector()).amax());
        }
    }
    Outcome::new(
        csv_same && set_same && model_same && replay_err <= 1e-12,
        format!(
            "sweep CSV identical {csv_same} ({} bytes), dataset round-trip {set_same}, model round-trip {model_same}, replay error {replay_err:.1e}",
            a.len()
        ),
    )
}

#[test]
fn acceptance() {
    let set = demo_set();
    let model = fit(&set);
    let checks: Vec<(u32, &str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        (1, "Gaussian product oracle", Box::new(criterion_1)),
        (2, "GMR correctness", Box::new(criterion_2)),
        (3, "finite-horizon LQR", Box::new(criterion_3)),
        (4, "infinite-horizon scalar gain", Box::new(criterion_4)),
        (5, "fusion", Box::new(|| criterion_5(&model))),
        (6, "static-target end-to-end", Box::new(criterion_6)),
        (7, "oscillation trend", Box::new(|| criterion_7(&model))),
        (8, "accuracy vs rho shape", Box::new(|| criterion_8(&model))),
        (9, "determinism and formats", Box::new(|| criterion_9(&set, &model))),
    ];
    let mut failed = Vec::new();
    for (n, name, check) in &checks {
        let o = check();
        println!(
            "criterion {n} {name}: {} ({})",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        if !o.pass {
            failed.push(*n);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
