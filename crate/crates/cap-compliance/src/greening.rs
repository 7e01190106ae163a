use std::collections::BTreeMap;

use crate::CapError;

/// Crop diversification verdict for one farmer's holding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Greening1 {
    Exempt,
    Compliant,
    Breach(String),
}

/// Diversification check over one farmer's (crop code, area ha) list.
/// Holdings under 10 ha are exempt; 10-30 ha need two crop types with the
/// main one at most 75% of the land; larger holdings need three types with
/// the top two at most 95%.
pub fn greening1_check(crop_areas: &[(String, f64)]) -> Result<Greening1, CapError> {
    if crop_areas.iter().any(|(_, a)| !(*a >= 0.0)) {
        return Err(CapError::InvalidArea);
    }
    let mut by_crop: BTreeMap<&str, f64> = BTreeMap::new();
    for (code, area) in crop_areas {
        *by_crop.entry(code.as_str()).or_insert(0.0) += area;
    }
    let mut shares: Vec<f64> = by_crop.values().copied().filter(|&a| a > 0.0).collect();
    shares.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let total: f64 = shares.iter().sum();

    if total < 10.0 {
        return Ok(Greening1::Exempt);
    }
    let verdict = if total <= 30.0 {
        if shares.len() < 2 {
            Greening1::Breach("fewer than two crop types".to_string())
        } else if shares[0] > 0.75 * total {
            Greening1::Breach("main crop exceeds 75% of the land".to_string())
        } else {
            Greening1::Compliant
        }
    } else if shares.len() < 3 {
        Greening1::Breach("fewer than three crop types".to_string())
    } else if shares[0] + shares[1] > 0.95 * total {
        Greening1::Breach("two main crops exceed 95% of the land".to_string())
    } else {
        Greening1::Compliant
    };
    Ok(verdict)
}

/// Run the check per farmer over (farmer id, crop code, area ha) rows.
/// Every farmer gets exactly one verdict.
pub fn greening1_by_farmer(
    rows: &[(String, String, f64)],
) -> Result<BTreeMap<String, Greening1>, CapError> {
    let mut grouped: BTreeMap<&str, Vec<(String, f64)>> = BTreeMap::new();
    for (farmer, crop, area) in rows {
        grouped.entry(farmer.as_str()).or_default().push((crop.clone(), *area));
    }
    grouped
        .into_iter()
        .map(|(farmer, areas)| Ok((farmer.to_string(), greening1_check(&areas)?)))
        .collect()
}
