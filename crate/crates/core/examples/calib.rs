use wmbench::audio::{attack, noise_plus_tones, segmental_snr, AttackKind};
use wmbench::codec::{self, CodecConfig, Scheme, WatermarkPayload};

fn main() {
    let len = 64_000;
    for scheme in Scheme::ALL {
        let cfg = CodecConfig::default_for(scheme).with_key(42);
        let mut snr_min = f64::INFINITY;
        let mut clean_errs = 0usize;
        let trials = 30;
        for seed in 0..trials {
            let audio = noise_plus_tones(seed, len, 16_000);
            let mut rng = wmbench_payload_rng(seed);
            let payload = WatermarkPayload::random(&mut rng, 16);
            let marked = codec::embed(&audio, &payload, &cfg).unwrap();
            let snr = segmental_snr(&audio, &marked).unwrap();
            snr_min = snr_min.min(snr);
            let det = codec::detect(&marked, 16, &cfg).unwrap();
            clean_errs += det.bits.iter().zip(&payload.bits).filter(|(a, b)| a != b).count();
        }
        print!("{:<10} snr_min {:6.2}  clean_errs {}/{}  BER@[40,30,20,10,0]:", scheme.name(), snr_min, clean_errs, trials * 16);
        for snr_db in [40.0, 30.0, 20.0, 10.0, 0.0] {
            let mut errs = 0usize;
            let n = 20;
            for seed in 0..n {
                let audio = noise_plus_tones(seed + 1000, len, 16_000);
                let mut rng = wmbench_payload_rng(seed + 1000);
                let payload = WatermarkPayload::random(&mut rng, 16);
                let marked = codec::embed(&audio, &payload, &cfg).unwrap();
                let attacked = attack(&marked, &AttackKind::AdditiveNoise { snr_db, seed: seed * 31 + snr_db as u64 }).unwrap();
                let det = codec::detect(&attacked, 16, &cfg).unwrap();
                errs += det.bits.iter().zip(&payload.bits).filter(|(a, b)| a != b).count();
            }
            print!(" {:.3}", errs as f64 / (n * 16) as f64);
        }
        println!();
    }
}

fn wmbench_payload_rng(seed: u64) -> impl rand::Rng {
    use rand::SeedableRng;
    rand_chacha::ChaCha8Rng::seed_from_u64(seed)
}
