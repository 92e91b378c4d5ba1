//! Talks to a running scoring service.
//!
//! CLSEC_SCORER_ENDPOINT=http://localhost:8000 cargo run --example remote_scorer

use clsec::bcjr::bcjr_decode;
use clsec::correction::{run_scheme, Scheme};
use clsec::phy::{transmit, ChannelConfig, CodeParams};
use clsec::remote::{ClientOptions, RemoteScorer, ServiceClient};
use clsec::scorer::Scorer;
use clsec::textcodec::{ascii_decode, ascii_encode, strip_message};

fn main() -> clsec::Result<()> {
    let client = match ServiceClient::from_env_or(None, ClientOptions::default()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return Ok(());
        }
    };
    let vocab = client.vocabulary(None)?;
    let scorer = RemoteScorer::connect(client.clone())?;
    let caps = scorer.capabilities();
    println!("model {} mask {} max_context {:?}, {} vocabulary words",
        caps.model, caps.mask_token, caps.max_context, vocab.len());

    let text = "There is a beach with palm trees, and clear blue water.";
    let sent = strip_message(text)?;
    let params = CodeParams::default();
    let ch = ChannelConfig::new(1.0);
    let rx = transmit(&ascii_encode(&sent), &params, &ch, 9)?;
    let llrs = bcjr_decode(&rx.coded_hat, &params, ch.crossover())?;
    let hd = ascii_decode(&llrs.hard_decision(), sent.lengths())?;
    println!("received  {}", hd.joined());
    let (out, _) = run_scheme(Scheme::Clsec, &hd, llrs.as_slice(), &vocab, &scorer, &params)?;
    println!("corrected {}", out.joined());
    println!("punctuated {}", client.punctuate(&out.joined())?);
    println!("bertscore {:.2}", client.bertscore(text, &out.joined())?);
    Ok(())
}
