//! Weight levels of the ITO microring modulator and its through-port notch.
//!
//! ```text
//! cargo run --example device_spectra
//! ```

use photogemm::device::{MrmModel, ITO_TABLE};

fn main() -> photogemm::Result<()> {
    let m = MrmModel::default();
    println!(
        "ring: {} nm, Q = {}, HWHM = {:.1} pm, ER = {} dB (t_min = {:.4})",
        m.resonance_nm,
        m.q_loaded,
        m.hwhm_nm() * 1e3,
        m.er_db,
        m.t_min()
    );

    println!("\nvoltage  shift(pm)");
    for p in &ITO_TABLE {
        println!(
            "{:>7.2}  {:>9.1}",
            p.voltage_v,
            m.resonance_shift_at(p.voltage_v)?
        );
    }

    println!("\n4-bit weight levels (probe at the rest resonance)");
    println!("level  transmission  shift(pm)  voltage(V)");
    for (i, l) in m.weight_levels(4)?.iter().enumerate() {
        println!(
            "{i:>5}  {:>12.5}  {:>9.2}  {:>10.4}",
            l.transmission, l.shift_pm, l.voltage_v
        );
    }

    // coarse spectrum of the extreme states
    let wl: Vec<f64> = (0..=12).map(|i| 1595.5 + 0.5 * i as f64).collect();
    let spec = m.spectrum(&wl, &[0.0, m.max_shift_pm()])?;
    println!("\nwavelength  T(0 V)  T(max V)");
    for (w, row) in wl.iter().zip(&spec) {
        println!("{w:>10.1}  {:.4}  {:.4}", row[0], row[1]);
    }

    match m.weight_levels(8) {
        Ok(levels) => println!("\n8-bit weighting realizable ({} levels)", levels.len()),
        Err(e) => println!("\n8-bit weighting: {e}"),
    }
    Ok(())
}
