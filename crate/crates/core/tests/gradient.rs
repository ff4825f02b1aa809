use im_meta::inference::{Input, LogisticModel, PairModel, SiameseConfig, SiameseModel};
use im_meta::rng::seeded;
use rand::Rng;

/// Central differences of the mean pair loss against `loss_grad`.
/// Returns the norm-relative error and the worst per-parameter error.
fn check<M: PairModel>(
    model: &mut M,
    inputs: &[Vec<f64>],
    pairs: &[(usize, usize, bool)],
    only: Option<&[usize]>,
) -> (f64, f64) {
    let xs: Vec<Input<'_>> = inputs.iter().map(|x| Input::Dense(x)).collect();
    let mut analytic = vec![0.0; model.params().len()];
    model.loss_grad(&xs, pairs, &mut analytic);
    let all: Vec<usize> = (0..analytic.len()).collect();
    let idx = only.unwrap_or(&all);
    let h = 1e-5;
    let (mut diff2, mut norm2, mut worst) = (0.0, 0.0, 0.0f64);
    for &i in idx {
        let orig = model.params()[i];
        let mut scratch = vec![0.0; analytic.len()];
        model.params_mut()[i] = orig + h;
        let up = model.loss_grad(&xs, pairs, &mut scratch);
        model.params_mut()[i] = orig - h;
        let down = model.loss_grad(&xs, pairs, &mut scratch);
        model.params_mut()[i] = orig;
        let numeric = (up - down) / (2.0 * h);
        let a = analytic[i];
        diff2 += (a - numeric).powi(2);
        norm2 += a.powi(2).max(numeric.powi(2));
        worst = worst.max((a - numeric).abs() / (a.abs() + numeric.abs()).max(1e-6));
    }
    (diff2.sqrt() / norm2.sqrt().max(1e-12), worst)
}

type Batch = (Vec<Vec<f64>>, Vec<(usize, usize, bool)>);

fn random_batch<R: Rng>(rng: &mut R, dim: usize, nodes: usize, pairs: usize) -> Batch {
    let inputs = (0..nodes)
        .map(|_| (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    let pairs = (0..pairs)
        .map(|_| {
            let a = rng.gen_range(0..nodes);
            let b = (a + rng.gen_range(1..nodes)) % nodes;
            (a, b, rng.gen_bool(0.5))
        })
        .collect();
    (inputs, pairs)
}

#[test]
fn siamese_gradient_matches_central_differences() {
    let mut rng = seeded(2024);
    let cfg = SiameseConfig {
        hidden: vec![7, 5],
        embedding: 4,
    };
    let mut worst_rel = 0.0f64;
    for draw in 0..100 {
        let mut model = SiameseModel::new(6, &cfg, &mut seeded(draw)).unwrap();
        // Move away from the initializer so biases are nonzero too.
        for p in model.params_mut() {
            *p = rng.gen_range(-1.0..1.0);
        }
        let (inputs, pairs) = random_batch(&mut rng, 6, 5, 4);
        let (rel, worst) = check(&mut model, &inputs, &pairs, None);
        assert!(rel <= 1e-4, "draw {draw}: norm-relative error {rel:e}");
        assert!(worst <= 1e-4, "draw {draw}: parameter error {worst:e}");
        worst_rel = worst_rel.max(rel);
    }
    assert!(worst_rel.is_finite());
}

#[test]
fn siamese_gradient_default_architecture_sampled() {
    let mut rng = seeded(7);
    let mut model = SiameseModel::new(12, &SiameseConfig::default(), &mut seeded(1)).unwrap();
    let (inputs, pairs) = random_batch(&mut rng, 12, 4, 3);
    let n = model.params().len();
    let mut idx: Vec<usize> = (0..300).map(|_| rng.gen_range(0..n)).collect();
    idx.extend(model.head_range());
    let (rel, _) = check(&mut model, &inputs, &pairs, Some(&idx));
    assert!(rel <= 1e-4, "norm-relative error {rel:e}");
}

#[test]
fn logistic_gradient_matches_central_differences() {
    let mut rng = seeded(99);
    for _ in 0..20 {
        let mut model = LogisticModel::new(5);
        for p in model.params_mut() {
            *p = rng.gen_range(-2.0..2.0);
        }
        let (inputs, pairs) = random_batch(&mut rng, 5, 4, 5);
        let (rel, worst) = check(&mut model, &inputs, &pairs, None);
        assert!(rel <= 1e-6 && worst <= 1e-4, "{rel:e} {worst:e}");
    }
}
