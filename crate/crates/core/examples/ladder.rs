//! Prints the b/y fragment ladder of a peptide.
//!
//!     cargo run --example ladder -- LGVTLYK

use denovo_ga::chem::Peptide;
use denovo_ga::theo::theoretical_spectrum;

fn main() -> denovo_ga::Result<()> {
    let text = std::env::args().nth(1).unwrap_or_else(|| "LGVTLYK".to_string());
    let peptide: Peptide = text.parse()?;
    let t = theoretical_spectrum(&peptide)?;
    let l = peptide.len();

    println!("{peptide}: parent mass {:.4} Da", peptide.parent_mass());
    println!("{:>3} {:>12} {:>12} {:>3}", "i", "b", "y", "j");
    for i in 1..l {
        println!("{i:>3} {:>12.4} {:>12.4} {:>3}", t.b_ions[i - 1], t.y_ions[l - i - 1], l - i);
    }
    if !t.internal_ions.is_empty() {
        println!("{} internal b-type ions", t.internal_ions.len());
    }
    Ok(())
}
