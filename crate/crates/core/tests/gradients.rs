mod common;

use common::{fd_gradient, relative_error};
use qarl_core::nn::Mlp;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const H: f64 = 1e-5;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn layer_sizes(case: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let input = rng.gen_range(1..=12);
    let output = rng.gen_range(1..=10);
    match case % 10 {
        0 => vec![input, 256, 128, output],
        1 => vec![input, output],
        _ => {
            let mut sizes = vec![input];
            sizes.extend((0..rng.gen_range(1..=3)).map(|_| rng.gen_range(2..=16)));
            sizes.push(output);
            sizes
        }
    }
}

#[test]
fn backward_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut large_cases = 0;
    for case in 0..50 {
        let sizes = layer_sizes(case, &mut rng);
        large_cases += usize::from(sizes.contains(&256));
        let net = Mlp::<f64>::new(&sizes, &mut rng).unwrap();
        let x: Vec<f64> = (0..sizes[0]).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let upstream: Vec<f64> = (0..net.output_size()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let (grad_params, grad_input) = net.backward(&x, &upstream).unwrap();

        // Large networks are checked on a random subset of coordinates.
        let coords: Vec<usize> = if net.n_params() <= 4000 {
            (0..net.n_params()).collect()
        } else {
            (0..2000).map(|_| rng.gen_range(0..net.n_params())).collect()
        };
        let mut probe = net.clone();
        let fd_params: Vec<f64> = coords
            .iter()
            .map(|&i| {
                let orig = probe.params()[i];
                probe.params_mut()[i] = orig + H;
                let up = dot(&probe.forward(&x).unwrap(), &upstream);
                probe.params_mut()[i] = orig - H;
                let down = dot(&probe.forward(&x).unwrap(), &upstream);
                probe.params_mut()[i] = orig;
                (up - down) / (2.0 * H)
            })
            .collect();
        let grad_params: Vec<f64> = coords.iter().map(|&i| grad_params[i]).collect();
        let fd_input = fd_gradient(&x, H, |xi| dot(&net.forward(xi).unwrap(), &upstream));
        let (ep, ei) = (relative_error(&fd_params, &grad_params), relative_error(&fd_input, &grad_input));
        assert!(ep < 1e-4, "case {case} {sizes:?}: parameter gradient error {ep}");
        assert!(ei < 1e-4, "case {case} {sizes:?}: input gradient error {ei}");
    }
    assert_eq!(large_cases, 5);
}

#[test]
fn batch_gradient_is_the_mean_of_sample_gradients() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let net = Mlp::<f64>::new(&[4, 9, 3], &mut rng).unwrap();
    let batch = 5;
    let x: Vec<f64> = (0..4 * batch).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let up: Vec<f64> = (0..3 * batch).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let tape = net.forward_batch(&x, batch).unwrap();
    let mut summed = vec![0.0; net.n_params()];
    net.backward_batch(&tape, &up, &mut summed, false).unwrap();
    let mut expected = vec![0.0; net.n_params()];
    for b in 0..batch {
        let (g, _) = net.backward(&x[4 * b..4 * b + 4], &up[3 * b..3 * b + 3]).unwrap();
        for (e, v) in expected.iter_mut().zip(g) {
            *e += v;
        }
    }
    assert!(relative_error(&summed, &expected) < 1e-12);
}

#[test]
fn gradient_is_linear_in_upstream() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let net = Mlp::<f64>::new(&[3, 8, 8, 2], &mut rng).unwrap();
    let x = [0.3, -0.2, 0.9];
    let (u1, u2) = ([0.5, -1.0], [2.0, 0.25]);
    let sum = [u1[0] + u2[0], u1[1] + u2[1]];
    let (g1, _) = net.backward(&x, &u1).unwrap();
    let (g2, _) = net.backward(&x, &u2).unwrap();
    let (g, _) = net.backward(&x, &sum).unwrap();
    let added: Vec<f64> = g1.iter().zip(&g2).map(|(a, b)| a + b).collect();
    assert!(relative_error(&g, &added) < 1e-12);
}
