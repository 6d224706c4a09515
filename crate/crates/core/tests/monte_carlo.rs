use hardy_core::estimate::McParams;
use hardy_core::functionals::{hardy_quotient, hardy_quotient_exact};
use hardy_core::optimize::sharpness_scan;
use hardy_core::trials::gaussian_product;

#[test]
fn gaussian_quotient_matches_closed_form() {
    for (i, (d, n, scale)) in [(3usize, 2usize, 1.0), (4, 3, 0.5), (5, 4, 2.0), (6, 2, 1.0)].into_iter().enumerate() {
        let u = gaussian_product(d, n, scale).unwrap();
        let exact = hardy_quotient_exact(&u).unwrap().quotient.value();
        assert!((exact - (d * (d - 2)) as f64 / (n - 1) as f64).abs() <= 1e-12 * exact);
        let r = hardy_quotient(&u, McParams::new(100_000, 11 + i as u64)).unwrap();
        let e = r.quotient.estimate().unwrap();
        assert!(e.sigmas_from(exact) <= 4.0, "d={d} N={n}: {} ± {} vs {exact}", e.mean, e.stderr);
        assert_eq!(e.n_rejected, 0);
    }
}

#[test]
fn quotient_is_dilation_invariant() {
    let mc = McParams::new(20_000, 5);
    let a = hardy_quotient(&gaussian_product(3, 3, 1.0).unwrap(), mc).unwrap();
    let b = hardy_quotient(&gaussian_product(3, 3, 7.5).unwrap(), mc).unwrap();
    // the same draws rescaled give the same ratio up to rounding
    assert!((a.quotient.value() - b.quotient.value()).abs() <= 1e-9 * a.quotient.value());
}

#[test]
fn estimates_depend_on_seed_and_chunking_only() {
    let u = gaussian_product(3, 3, 1.0).unwrap();
    let run = |seed, chunk| hardy_quotient(&u, McParams::new(30_000, seed).with_chunk_size(chunk)).unwrap();
    assert_eq!(run(1, 1000), run(1, 1000));
    assert_ne!(run(1, 1000).quotient.value(), run(2, 1000).quotient.value());
    assert_ne!(run(1, 1000).quotient.value(), run(1, 3000).quotient.value());
}

#[test]
fn metropolis_matches_exact_two_particle_sharpness() {
    let pts = sharpness_scan(2, &[0.2, 0.1], McParams::new(100_000, 9)).unwrap();
    for p in pts {
        let exact = p.exact_quotient.unwrap();
        assert!(p.quotient.sigmas_from(exact) <= 4.0, "δ={}: {} ± {} vs {exact}", p.delta, p.quotient.mean, p.quotient.stderr);
        let beta = p.exact_beta.unwrap();
        assert!(p.beta.sigmas_from(beta) <= 4.0);
    }
}
