use causal_shap::lever::{sample_task, LeverConfig, LeverState};
use causal_shap::model::{load_mlp, scripted_lever_policy, Activation, Mlp};
use causal_shap::{Error, PolicyModel};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Layers = Vec<(Vec<Vec<f64>>, Vec<f64>, Activation)>;

fn random_layers(dims: &[usize], rng: &mut ChaCha8Rng) -> Layers {
    dims.windows(2)
        .map(|d| {
            let scale = 1.0 / (d[0] as f64).sqrt();
            let w = (0..d[1])
                .map(|_| (0..d[0]).map(|_| rng.random_range(-scale..scale)).collect())
                .collect();
            let b = (0..d[1]).map(|_| rng.random_range(-0.1..0.1)).collect();
            (w, b, Activation::Tanh)
        })
        .collect()
}

fn reference_forward(layers: &Layers, x: &[f64]) -> Vec<f64> {
    let mut h = DVector::from_column_slice(x);
    for (w, b, _) in layers {
        let m = DMatrix::from_fn(w.len(), w[0].len(), |r, c| w[r][c]);
        h = (m * h + DVector::from_column_slice(b)).map(f64::tanh);
    }
    h.iter().copied().collect()
}

#[test]
fn mlp_matches_reference_forward_pass() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let layers = random_layers(&[8, 64, 64, 4], &mut rng);
    let mlp = Mlp::from_layers(layers.clone()).unwrap();
    assert_eq!((mlp.input_dim(), mlp.output_dim()), (8, 4));
    for _ in 0..200 {
        let x: Vec<f64> = (0..8).map(|_| rng.random_range(-2.0..2.0)).collect();
        let (a, b) = (mlp.evaluate(&x), reference_forward(&layers, &x));
        for (u, v) in a.iter().zip(&b) {
            assert!((u - v).abs() <= 1e-12, "{u} vs {v}");
        }
        assert_eq!(a, mlp.evaluate(&x));
    }
}

#[test]
fn save_and_load_are_bit_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mlp = Mlp::from_layers(random_layers(&[8, 16, 4], &mut rng)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("policy.json");
    mlp.save(&path).unwrap();
    let back = load_mlp(&path).unwrap();
    assert_eq!(back, mlp);
    let x = [0.1, -0.2, 0.3, 0.01, 0.02, -0.03, 0.5, -0.5];
    assert_eq!(back.evaluate(&x), mlp.evaluate(&x));
}

#[test]
fn schema_errors_name_the_layer() {
    let bad = r#"{"layers":[{"w":[[1,0],[0,1]],"b":[0,0],"act":"tanh"},{"w":[[1,2,3]],"b":[0],"act":"tanh"}],"input":2,"output":1}"#;
    match Mlp::from_json(bad) {
        Err(Error::ModelLoad { layer: 1, .. }) => {}
        other => panic!("{other:?}"),
    }
    let act = r#"{"layers":[{"w":[[1]],"b":[0],"act":"gelu"}],"input":1,"output":1}"#;
    assert!(matches!(Mlp::from_json(act), Err(Error::ModelLoad { layer: 0, .. })));
}

#[test]
fn scripted_policy_outputs_are_bounded() {
    let p = scripted_lever_policy();
    let cfg = LeverConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..5000 {
        let (a, b) = sample_task(&mut rng);
        let mut s = cfg.reset(a, b).unwrap();
        s.q1 = rng.random_range(-1.0..1.0);
        s.q4 = rng.random_range(0.0..cfg.q4_max);
        let q = [s.q1, rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
        let s = LeverState::from_slice(&[q[0], q[1], q[2], s.q4, s.dx, s.dz, s.theta_lever, s.theta_target]).unwrap();
        assert!(p.evaluate(&s.to_array()).iter().all(|v| (-1.0..=1.0).contains(v)));
    }
}
