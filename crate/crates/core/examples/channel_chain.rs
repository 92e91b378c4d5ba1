//! Raw and decoded bit error rates of the coded QPSK link over a few SNRs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use clsec::bcjr::bcjr_decode;
use clsec::metrics::ber;
use clsec::phy::{transmit, ChannelConfig, CodeParams};

fn main() -> clsec::Result<()> {
    let params = CodeParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let u: Vec<u8> = (0..20_000).map(|_| rng.random_range(0..2)).collect();

    println!("{:>6} {:>10} {:>10} {:>10}", "snr_db", "eps", "raw_ber", "dec_ber");
    for snr_db in [0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0] {
        let ch = ChannelConfig::new(snr_db);
        let rx = transmit(&u, &params, &ch, 42)?;
        let llrs = bcjr_decode(&rx.coded_hat, &params, ch.crossover())?;
        let raw = rx.raw_bit_errors() as f64 / rx.coded.len() as f64;
        println!("{snr_db:>6.1} {:>10.5} {raw:>10.5} {:>10.5}", ch.crossover(), ber(&llrs.hard_decision(), &u)?);
    }
    Ok(())
}
