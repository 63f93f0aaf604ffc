//! The conjugate basis: unbiasedness against the level basis and a round trip.

use num_complex::Complex64;
use qudit_teleport::qstate::make_input_state;
use qudit_teleport::{ConjugateBasis, HalfInt, Spectrum};

fn main() -> qudit_teleport::Result<()> {
    let spectrum = Spectrum::from_doubled(3)?;
    let basis = ConjugateBasis::new(spectrum);
    println!("levels {spectrum}, period {}", basis.period());

    for p in spectrum.values() {
        let v = basis.p_vector(p)?;
        let overlaps: Vec<String> = spectrum
            .values()
            .map(|q| format!("{:.4}", v.amplitude_at(&[q]).expect("on ladder").norm_sqr()))
            .collect();
        println!("|<q|p = {p:>4}>|² = [{}]", overlaps.join(", "));
    }

    let psi = make_input_state(
        spectrum,
        &[
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 2.0),
            Complex64::new(-1.0, 1.0),
            Complex64::new(0.5, 0.0),
        ],
    )?;
    let coefficients = basis.q_to_p(&psi)?;
    let back = basis.p_to_q(&coefficients, spectrum.ladder())?;
    println!("round trip error {:.2e}", back.max_abs_diff(&psi)?);
    println!(
        "<p = 1/2 | ψ> = {:.6}",
        coefficients[basis.p_ladder().index_of(HalfInt::HALF).expect("on ladder")]
    );
    Ok(())
}
