//! Reductant bookkeeping formulas.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ReductantInputs {
    /// Corrected reductant rate, ton/hr.
    pub corrected_reductant_rate: f64,
    /// Dropped coal rate.
    pub dropped_coal_rate: f64,
    /// Hot-metal production.
    pub production: f64,
    /// Total PCI rate.
    pub pci_total: f64,
    /// Real-time production.
    pub production_real: f64,
    /// Total coke (house spot calculation).
    pub coke_total: f64,
    /// Pig production burden change.
    pub pig_burden: f64,
}

fn check_finite(r: &ReductantInputs) -> Result<()> {
    let all = [
        r.corrected_reductant_rate,
        r.dropped_coal_rate,
        r.production,
        r.pci_total,
        r.production_real,
        r.coke_total,
        r.pig_burden,
    ];
    if all.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("reductant inputs must be finite".into()));
    }
    Ok(())
}

/// PCI rate in ton/hr: `R_c − R_d · P · 1000 / 24`.
pub fn pci_rate(r: &ReductantInputs) -> Result<f64> {
    check_finite(r)?;
    Ok(r.corrected_reductant_rate - r.dropped_coal_rate * r.production * 1000.0 / 24.0)
}

/// Total reductant ratio: `(PCI_total / P_real · 24 + C_c / C_pb) · 1000`.
pub fn rar(r: &ReductantInputs) -> Result<f64> {
    check_finite(r)?;
    if r.production_real <= 0.0 || r.pig_burden <= 0.0 {
        return Err(Error::Domain(format!(
            "RAR needs positive production ({}) and burden change ({})",
            r.production_real, r.pig_burden
        )));
    }
    if r.pci_total < 0.0 || r.coke_total < 0.0 {
        return Err(Error::Domain("RAR inputs must be non-negative".into()));
    }
    Ok((r.pci_total / r.production_real * 24.0 + r.coke_total / r.pig_burden) * 1000.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pci_rate_examples() {
        let mut r = ReductantInputs {
            corrected_reductant_rate: 150.0,
            production: 100.0,
            ..Default::default()
        };
        assert_eq!(pci_rate(&r).unwrap(), 150.0);
        r.dropped_coal_rate = 0.024;
        assert!((pci_rate(&r).unwrap() - 50.0).abs() < 1e-12);
        let base = pci_rate(&r).unwrap();
        r.corrected_reductant_rate += 7.25;
        assert!((pci_rate(&r).unwrap() - base - 7.25).abs() < 1e-12);
    }

    #[test]
    fn rar_examples() {
        let mut r = ReductantInputs {
            production_real: 240.0,
            pig_burden: 3.0,
            ..Default::default()
        };
        assert_eq!(rar(&r).unwrap(), 0.0);
        r.pci_total = 10.0;
        r.coke_total = 3.0;
        assert!((rar(&r).unwrap() - 2000.0).abs() < 1e-9);
        let first = r.pci_total / r.production_real;
        r.pci_total *= 3.0;
        r.production_real *= 3.0;
        assert!((r.pci_total / r.production_real - first).abs() < 1e-15);
        assert!((rar(&r).unwrap() - 2000.0).abs() < 1e-9);
    }

    #[test]
    fn rar_domain_errors() {
        let r = ReductantInputs { pig_burden: 1.0, ..Default::default() };
        assert!(rar(&r).is_err());
        let r = ReductantInputs { production_real: 1.0, ..Default::default() };
        assert!(rar(&r).is_err());
        let r = ReductantInputs { production: f64::NAN, ..Default::default() };
        assert!(pci_rate(&r).is_err());
    }
}
