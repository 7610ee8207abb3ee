use chanmatch::harness::Experiment;
use chanmatch::ldpc::{construct_code, read_alist, write_alist, LdpcCode};
use chanmatch::matching::{ml_estimate, turbo_decode, NU_MIN};
use chanmatch::mlc::{decide_upper, mlc_encode, remap, EstimateStructure};
use chanmatch::rng::stream;
use chanmatch::surrogate_channel::{calibrate_kappa, transmit, ChannelState};
use chanmatch::units::dbm_to_w;
use chanmatch::{Complex64, NlinParams, Strategy};
use rand::Rng;
use std::path::Path;

const P_OPT: f64 = 2.0893e-4;
const SIGMA2: f64 = 4.5627e-6;

fn experiment(n: usize, sigma2: f64) -> Experiment {
    let code = construct_code(n, 0.63, 1).unwrap();
    let params = NlinParams::new(sigma2, calibrate_kappa(sigma2, P_OPT).unwrap(), 0.0).unwrap();
    Experiment::new(code, params, P_OPT, EstimateStructure::Scalar).unwrap()
}

/// Transmitted symbols and channel output of block `block`, drawn exactly as
/// `Experiment::run_block` draws them.
fn block(exp: &Experiment, p_w: f64, seed: u64, block: u64) -> (Vec<Complex64>, Vec<Complex64>, Vec<u8>) {
    let mut rng = stream(seed, block);
    let info: Vec<u8> = (0..exp.bits_per_block()).map(|_| rng.random::<bool>() as u8).collect();
    let frame = mlc_encode(&exp.constellation, &exp.code, &info).unwrap();
    let state = ChannelState::new(p_w, exp.code.n()).unwrap();
    let y = transmit(&exp.constellation, &frame.symbols, &state, &exp.params, &mut rng).unwrap();
    (frame.symbols, y, frame.ldpc_codeword)
}

#[test]
fn run_block_reproduces_the_channel_draw() {
    let exp = experiment(4000, SIGMA2);
    let dec = exp.decoder_config(Strategy::Fixed, 3, 3).unwrap();
    let (_, y, _) = block(&exp, P_OPT, 5, 2);
    let direct = turbo_decode(&exp.constellation, &exp.code, &y, &dec, None).unwrap();
    let via_harness = exp.run_block(&dec, P_OPT, 5, 2).unwrap().decode;
    assert_eq!(direct.info_bits, via_harness.info_bits);
}

#[test]
fn matched_without_passes_is_fixed() {
    let exp = experiment(4000, SIGMA2);
    for r1 in [3, 12] {
        let fixed = exp.decoder_config(Strategy::Fixed, r1, 0).unwrap();
        let matched = exp.decoder_config(Strategy::Matched, r1, 0).unwrap();
        for dbm in [-10.5, -6.8, -4.0] {
            for b in 0..10 {
                let a = exp.run_block(&fixed, dbm_to_w(dbm), 77, b).unwrap();
                let m = exp.run_block(&matched, dbm_to_w(dbm), 77, b).unwrap();
                assert_eq!(a.decode.info_bits, m.decode.info_bits);
                assert_eq!(a.decode.codeword, m.decode.codeword);
                assert_eq!(a.decode.converged, m.decode.converged);
                assert_eq!(a.decode.bp_iterations, m.decode.bp_iterations);
            }
        }
    }
}

#[test]
fn fixed_and_genie_coincide_at_the_optimum() {
    let exp = experiment(4000, SIGMA2);
    let fixed = exp.decoder_config(Strategy::Fixed, 3, 3).unwrap();
    let genie = exp.decoder_config(Strategy::Genie, 3, 3).unwrap();
    for b in 0..10 {
        let a = exp.run_block(&fixed, P_OPT, 78, b).unwrap();
        let g = exp.run_block(&genie, P_OPT, 78, b).unwrap();
        assert_eq!(a.decode.info_bits, g.decode.info_bits);
        assert_eq!(a.decode.final_estimate, g.decode.final_estimate);
    }
}

#[test]
fn genie_decodes_the_coded_level_at_the_optimum() {
    let exp = experiment(8000, SIGMA2);
    assert_eq!(exp.code.k(), 5040);
    let genie = exp.decoder_config(Strategy::Genie, 20, 0).unwrap();
    for b in 0..20 {
        let out = exp.run_block(&genie, P_OPT, 79, b).unwrap();
        assert!(out.decode.converged);
        assert_eq!(out.coded_errors, 0, "block {b}");
    }
}

#[test]
fn estimate_from_transmitted_symbols_is_accurate() {
    let exp = experiment(8000, SIGMA2);
    let nu = exp.params.noise_variance(P_OPT).unwrap();
    for b in 0..5 {
        let (x, y, _) = block(&exp, P_OPT, 80, b);
        let est = ml_estimate(&exp.constellation, &y, &x, EstimateStructure::Scalar, NU_MIN)
            .unwrap()
            .estimate;
        assert!((est.total_variance() / nu - 1.0).abs() < 0.05);
    }
}

#[test]
fn converged_pass_feeds_the_oracle_estimate() {
    // 6 dB less ASE, so upper-level decisions are almost always right once
    // level 0 decodes; the power is off-nominal so re-estimation proceeds.
    let exp = experiment(4000, SIGMA2 / 4.0);
    let matched = exp.decoder_config(Strategy::Matched, 20, 2).unwrap();
    let p = dbm_to_w(-3.5);
    let mut checked = 0;
    for b in 0..20 {
        let (x, y, codeword) = block(&exp, p, 81, b);
        let out = turbo_decode(&exp.constellation, &exp.code, &y, &matched, None).unwrap();
        let first = &out.passes[0];
        if !(first.converged && out.passes.len() > 1) {
            continue;
        }
        // Level 0 is the transmitted codeword whenever BP converges here.
        let upper = decide_upper(&exp.constellation, &y, &codeword, &first.estimate).unwrap();
        if remap(&exp.constellation, &codeword, &upper).unwrap() != x {
            continue;
        }
        let oracle = ml_estimate(&exp.constellation, &y, &x, EstimateStructure::Scalar, NU_MIN)
            .unwrap()
            .estimate;
        assert_eq!(out.passes[1].estimate, oracle);
        checked += 1;
    }
    assert!(checked >= 10, "only {checked} blocks exercised the property");
}

#[test]
fn larger_budget_never_loses_blocks() {
    let exp = experiment(4000, SIGMA2);
    let count = |r1: usize| {
        let dec = exp.decoder_config(Strategy::Fixed, r1, 0).unwrap();
        (0..200)
            .filter(|&b| exp.run_block(&dec, dbm_to_w(-10.5), 82, b).unwrap().coded_errors > 0)
            .count()
    };
    let (small, large) = (count(4), count(12));
    assert!(small > 0, "operating point too easy to be informative");
    assert!(large <= small, "{large} > {small}");
}

#[test]
fn constructed_code_survives_alist_round_trip() {
    let code = construct_code(4000, 0.63, 9).unwrap();
    let text = write_alist(code.h());
    let h = read_alist(&text, Path::new("mem.alist")).unwrap();
    assert_eq!(&h, code.h());
    let again = LdpcCode::from_parity_check(h).unwrap();
    let mut rng = stream(1, 1);
    let info: Vec<u8> = (0..again.k()).map(|_| rng.random::<bool>() as u8).collect();
    let cw = again.encode(&info).unwrap();
    assert_eq!(code.h().syndrome_weight(&cw), 0);
}
