use clsec::metrics::{ber, rouge_l, wer};

fn main() -> clsec::Result<()> {
    let reference = "there is a beach with palm trees and clear blue water";
    let hypothesis = "there is a beach with palm tress and clear blue water";
    let r: Vec<&str> = reference.split(' ').collect();
    let h: Vec<&str> = hypothesis.split(' ').collect();
    println!("WER     {:.4}", wer(&r, &h)?);
    println!("ROUGE-L {:.2}", rouge_l(reference, hypothesis));
    println!("ROUGE-L {:.2} (two words dropped)", rouge_l(reference, "there is a beach with palm and blue water"));
    println!("BER     {:.4}", ber(&[0, 1, 1, 0, 1, 0, 0, 1], &[0, 1, 0, 0, 1, 0, 1, 1])?);
    Ok(())
}
