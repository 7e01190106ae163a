use crate::{Metaclass, PhenoError, PhenoPrediction, Stage, STAGES};

#[derive(Debug, Clone)]
pub struct ObsReject {
    pub line: usize,
    pub reason: String,
}

/// One field visit: the dominant stage with its prevalence and, when mixed,
/// the runner-up.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundObservation {
    pub field: i64,
    pub day: u32,
    pub primary: Stage,
    pub primary_pct: f64,
    pub secondary: Option<Stage>,
    pub secondary_pct: Option<f64>,
}

impl GroundObservation {
    /// Collapse to a metaclass; a non-adjacent secondary demotes to the unit
    /// class, matching the prediction rule.
    pub fn metaclass(&self) -> Metaclass {
        match self.secondary {
            Some(s) => {
                Metaclass::pair(self.primary, s).unwrap_or(Metaclass::unit(self.primary))
            }
            None => Metaclass::unit(self.primary),
        }
    }
}

/// Columns: field_id, day, primary, primary_pct, secondary, secondary_pct.
/// Secondary cells may be empty. Bad rows are rejected with the line number.
pub fn read_ground_obs_csv(
    text: &str,
) -> Result<(Vec<GroundObservation>, Vec<ObsReject>), PhenoError> {
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| PhenoError::MissingFeature(format!("unreadable header: {e}")))?
        .clone();
    let want = ["field_id", "day", "primary", "primary_pct", "secondary", "secondary_pct"];
    for col in want {
        if !headers.iter().any(|h| h == col) {
            return Err(PhenoError::MissingFeature(col.to_string()));
        }
    }
    let col = |name: &str| headers.iter().position(|h| h == name).unwrap();
    let (cf, cd, cp, cpp, cs, csp) = (
        col("field_id"),
        col("day"),
        col("primary"),
        col("primary_pct"),
        col("secondary"),
        col("secondary_pct"),
    );

    let mut obs = Vec::new();
    let mut rejects = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let mut reject = |reason: String| rejects.push(ObsReject { line, reason });
        let record = match record {
            Ok(r) => r,
            Err(e) => {
                reject(format!("unreadable: {e}"));
                continue;
            }
        };
        let cell = |idx: usize| record.get(idx).unwrap_or("").trim();
        let field = match cell(cf).parse::<i64>() {
            Ok(v) => v,
            Err(_) => {
                reject(format!("bad field_id {:?}", cell(cf)));
                continue;
            }
        };
        let day = match cell(cd).parse::<u32>() {
            Ok(v) => v,
            Err(_) => {
                reject(format!("bad day {:?}", cell(cd)));
                continue;
            }
        };
        let primary = match Stage::parse(cell(cp)) {
            Ok(s) => s,
            Err(_) => {
                reject(format!("bad primary stage {:?}", cell(cp)));
                continue;
            }
        };
        let primary_pct = match cell(cpp).parse::<f64>() {
            Ok(v) if v > 0.0 && v <= 100.0 => v,
            _ => {
                reject(format!("bad primary_pct {:?}", cell(cpp)));
                continue;
            }
        };
        let (secondary, secondary_pct) = if cell(cs).is_empty() {
            (None, None)
        } else {
            let s = match Stage::parse(cell(cs)) {
                Ok(s) => s,
                Err(_) => {
                    reject(format!("bad secondary stage {:?}", cell(cs)));
                    continue;
                }
            };
            let pct = match cell(csp).parse::<f64>() {
                Ok(v) if v > 0.0 && v <= 100.0 => v,
                _ => {
                    reject(format!("bad secondary_pct {:?}", cell(csp)));
                    continue;
                }
            };
            if pct > primary_pct {
                reject(format!("secondary prevalence {pct} exceeds primary {primary_pct}"));
                continue;
            }
            (Some(s), Some(pct))
        };
        obs.push(GroundObservation { field, day, primary, primary_pct, secondary, secondary_pct });
    }
    Ok((obs, rejects))
}

/// Columns: field_id, day, metaclass, primary, secondary, then one weight
/// column per stage in season order.
pub fn write_predictions_csv(rows: &[(i64, u32, PhenoPrediction)]) -> String {
    let mut out = String::from("field_id,day,metaclass,primary,secondary");
    for s in STAGES {
        out.push_str(&format!(",w_{}", s.name().to_ascii_lowercase()));
    }
    out.push('\n');
    for (field, day, pred) in rows {
        let secondary =
            pred.metaclass.secondary().map(|s| s.name().to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{field},{day},{},{},{secondary}",
            pred.metaclass.index(),
            pred.metaclass.primary()
        ));
        for s in STAGES {
            let w = pred.ranked.iter().find(|(st, _)| *st == s).map(|&(_, w)| w).unwrap_or(0.0);
            out.push_str(&format!(",{w}"));
        }
        out.push('\n');
    }
    out
}
