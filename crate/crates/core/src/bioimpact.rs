//! Hearing thresholds, audibility and impact ranges for marine species.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reference daily exposure duration of the threshold criteria, s.
pub const REFERENCE_EXPOSURE_S: f64 = 28_800.0;

const TTS_OFFSET_DB: f64 = 75.0;
const PTS_OFFSET_DB: f64 = 95.0;

/// Illustrative species set compiled into the binary.
pub const BUNDLED_SPECIES_CSV: &str = include_str!("../data/species.csv");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpeciesGroup {
    Mammal,
    Fish,
}

impl SpeciesGroup {
    fn parse(s: &str) -> Option<Self> {
        match s {
            "mammal" => Some(SpeciesGroup::Mammal),
            "fish" => Some(SpeciesGroup::Fish),
            _ => None,
        }
    }

    fn as_str(&self) -> &'static str {
        match self {
            SpeciesGroup::Mammal => "mammal",
            SpeciesGroup::Fish => "fish",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeciesProfile {
    pub name: String,
    pub group: SpeciesGroup,
    /// Generic threshold value, dB re 1 µPa.
    pub gtv: f64,
    /// (frequency Hz, threshold dB re 1 µPa), frequency strictly increasing.
    pub audiogram: Vec<(f64, f64)>,
}

impl SpeciesProfile {
    pub fn validate(&self) -> Result<()> {
        let field = |f: &str| format!("species `{}`.{f}", self.name);
        if self.name.is_empty() {
            return Err(Error::invalid("species.name", "must not be empty"));
        }
        if !self.gtv.is_finite() {
            return Err(Error::invalid(field("gtv_db"), "must be finite"));
        }
        if self.audiogram.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::invalid(
                field("audiogram"),
                "frequencies must be strictly increasing",
            ));
        }
        if let Some(min) = self.audiogram.iter().map(|p| p.1).reduce(f64::min) {
            if self.gtv > min + 1e-9 {
                return Err(Error::invalid(
                    field("gtv_db"),
                    format!("{} exceeds the audiogram minimum {min}", self.gtv),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExposureCriteria {
    /// Daily exposure duration, s.
    pub t_exposure_s: f64,
}

impl Default for ExposureCriteria {
    fn default() -> Self {
        ExposureCriteria {
            t_exposure_s: REFERENCE_EXPOSURE_S,
        }
    }
}

impl ExposureCriteria {
    pub fn validate(&self) -> Result<()> {
        if self.t_exposure_s > 0.0 && self.t_exposure_s.is_finite() {
            Ok(())
        } else {
            Err(Error::invalid(
                "exposure.t_exposure_s",
                format!("{} must be > 0", self.t_exposure_s),
            ))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImpactResult {
    pub species: String,
    pub tts_level: f64,
    pub pts_level: f64,
    pub audible_radius: f64,
    pub tts_radius: f64,
    pub pts_radius: f64,
}

fn duration_term(t: f64) -> Result<f64> {
    if t > 0.0 && t.is_finite() {
        Ok(10.0 * (t / REFERENCE_EXPOSURE_S).log10())
    } else {
        Err(Error::invalid(
            "exposure duration",
            format!("{t} s must be > 0"),
        ))
    }
}

/// TTS onset level GTV + 75 − 10·log₁₀(T/28800), dB re 1 µPa.
pub fn tts_threshold(gtv: f64, t: f64) -> Result<f64> {
    Ok(gtv + TTS_OFFSET_DB - duration_term(t)?)
}

/// PTS onset level GTV + 95 − 10·log₁₀(T/28800), dB re 1 µPa.
pub fn pts_threshold(gtv: f64, t: f64) -> Result<f64> {
    Ok(gtv + PTS_OFFSET_DB - duration_term(t)?)
}

pub fn is_audible(spl: f64, gtv: f64) -> bool {
    spl > gtv
}

/// Range inside which a source of level `source_total` (dB @ 1 m) exceeds
/// `threshold` under spherical spreading. 0 when the threshold is never
/// reached; otherwise at least the 1 m reference distance.
pub fn impact_radius(source_total: f64, threshold: f64) -> f64 {
    if source_total < threshold {
        return 0.0;
    }
    10f64.powf((source_total - threshold) / 20.0).max(1.0)
}

/// Impact ranges for each species given the combined source level at 1 m.
/// A silent source (`None`) yields zero ranges.
pub fn assess(
    source_total: Option<f64>,
    species: &[SpeciesProfile],
    exposure: &ExposureCriteria,
) -> Result<Vec<ImpactResult>> {
    if species.is_empty() {
        return Err(Error::invalid("species", "no species profiles loaded"));
    }
    species
        .iter()
        .map(|sp| {
            let tts_level = tts_threshold(sp.gtv, exposure.t_exposure_s)?;
            let pts_level = pts_threshold(sp.gtv, exposure.t_exposure_s)?;
            let radius = |thr: f64| source_total.map_or(0.0, |sl| impact_radius(sl, thr));
            Ok(ImpactResult {
                species: sp.name.clone(),
                tts_level,
                pts_level,
                audible_radius: radius(sp.gtv),
                tts_radius: radius(tts_level),
                pts_radius: radius(pts_level),
            })
        })
        .collect()
}

/// Reads species with header `name,group,gtv_db,audiogram`, the audiogram
/// being `freq_hz:threshold_db` pairs separated by semicolons.
pub fn read_species_csv<R: Read>(reader: R, origin: &Path) -> Result<Vec<SpeciesProfile>> {
    let parse_err = |line: u64, message: String| Error::Parse {
        path: origin.to_path_buf(),
        line,
        message,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| parse_err(1, e.to_string()))?
        .clone();
    if !headers.iter().eq(["name", "group", "gtv_db", "audiogram"]) {
        return Err(parse_err(
            1,
            "expected header `name,group,gtv_db,audiogram`".into(),
        ));
    }
    let mut out = Vec::new();
    for record in rdr.records() {
        let record = record
            .map_err(|e| parse_err(e.position().map(|p| p.line()).unwrap_or(0), e.to_string()))?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let name = record[0].to_string();
        let group = SpeciesGroup::parse(&record[1]).ok_or_else(|| {
            parse_err(
                line,
                format!("group `{}` is not mammal or fish", &record[1]),
            )
        })?;
        let gtv = record[2]
            .parse::<f64>()
            .map_err(|_| parse_err(line, format!("gtv_db `{}` is not a number", &record[2])))?;
        let audiogram = record[3]
            .split(';')
            .filter(|s| !s.trim().is_empty())
            .map(|pair| {
                let (f, t) = pair.split_once(':').ok_or_else(|| {
                    parse_err(
                        line,
                        format!("audiogram entry `{pair}` is not freq:threshold"),
                    )
                })?;
                let num = |s: &str| {
                    s.trim().parse::<f64>().map_err(|_| {
                        parse_err(line, format!("audiogram entry `{pair}` is not numeric"))
                    })
                };
                Ok((num(f)?, num(t)?))
            })
            .collect::<Result<Vec<_>>>()?;
        let profile = SpeciesProfile {
            name,
            group,
            gtv,
            audiogram,
        };
        profile
            .validate()
            .map_err(|e| parse_err(line, e.to_string()))?;
        out.push(profile);
    }
    if out.is_empty() {
        return Err(parse_err(1, "no species rows".into()));
    }
    Ok(out)
}

pub fn load_species_csv(path: &Path) -> Result<Vec<SpeciesProfile>> {
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_species_csv(file, path)
}

pub fn bundled_species() -> Vec<SpeciesProfile> {
    read_species_csv(
        BUNDLED_SPECIES_CSV.as_bytes(),
        Path::new("<bundled species.csv>"),
    )
    .expect("bundled species table is valid")
}

pub fn write_species_csv<W: Write>(species: &[SpeciesProfile], writer: W) -> std::io::Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["name", "group", "gtv_db", "audiogram"])?;
    for sp in species {
        let audiogram = sp
            .audiogram
            .iter()
            .map(|(f, t)| format!("{f}:{t}"))
            .collect::<Vec<_>>()
            .join(";");
        wtr.write_record([
            sp.name.as_str(),
            sp.group.as_str(),
            &sp.gtv.to_string(),
            &audiogram,
        ])?;
    }
    wtr.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profile(gtv: f64) -> SpeciesProfile {
        SpeciesProfile {
            name: "test".into(),
            group: SpeciesGroup::Mammal,
            gtv,
            audiogram: vec![(1000.0, gtv + 10.0), (10_000.0, gtv)],
        }
    }

    #[test]
    fn tts_examples() {
        assert_eq!(tts_threshold(60.0, 28_800.0).unwrap(), 135.0);
        assert!((tts_threshold(60.0, 2_880.0).unwrap() - 145.0).abs() < 1e-12);
        assert!((tts_threshold(60.0, 288_000.0).unwrap() - 125.0).abs() < 1e-12);
        assert!(tts_threshold(60.0, 0.0).is_err());
    }

    #[test]
    fn pts_examples() {
        assert_eq!(pts_threshold(60.0, 28_800.0).unwrap(), 155.0);
        assert!((pts_threshold(60.0, 2_880.0).unwrap() - 165.0).abs() < 1e-12);
        assert!(pts_threshold(60.0, -1.0).is_err());
    }

    #[test]
    fn audibility() {
        assert!(is_audible(100.0, 60.0));
        assert!(!is_audible(60.0, 60.0));
        assert!(!is_audible(59.9, 60.0));
    }

    #[test]
    fn impact_radius_examples() {
        assert!((impact_radius(149.0, 115.0) - 50.118_723_362_727_2).abs() < 1e-9);
        assert_eq!(impact_radius(149.0, 149.0), 1.0);
        assert_eq!(impact_radius(149.0, 160.0), 0.0);
    }

    #[test]
    fn assess_single_species() {
        // GTV 40 puts TTS at 115 dB and PTS at 135 dB.
        let r = assess(Some(149.0), &[profile(40.0)], &ExposureCriteria::default()).unwrap();
        assert!((r[0].tts_radius - 50.118_723_362_727_2).abs() < 1e-9);
        assert!((r[0].pts_radius - 5.011_872_336_272_72).abs() < 1e-9);
        assert!(r[0].pts_radius <= r[0].tts_radius && r[0].tts_radius <= r[0].audible_radius);

        // GTV 60: TTS 135 dB is reached inside ~5 m; PTS 155 dB never.
        let r = assess(Some(149.0), &[profile(60.0)], &ExposureCriteria::default()).unwrap();
        assert!((r[0].tts_radius - 5.011_872_336_272_72).abs() < 1e-9);
        assert_eq!(r[0].pts_radius, 0.0);
    }

    #[test]
    fn assess_quiet_source() {
        let r = assess(Some(50.0), &[profile(60.0)], &ExposureCriteria::default()).unwrap();
        assert_eq!(
            (r[0].audible_radius, r[0].tts_radius, r[0].pts_radius),
            (0.0, 0.0, 0.0)
        );
        let r = assess(None, &[profile(60.0)], &ExposureCriteria::default()).unwrap();
        assert_eq!(r[0].audible_radius, 0.0);
    }

    #[test]
    fn doubling_exposure_widens_tts_zone() {
        let base = assess(Some(149.0), &[profile(40.0)], &ExposureCriteria::default()).unwrap();
        let long = assess(
            Some(149.0),
            &[profile(40.0)],
            &ExposureCriteria {
                t_exposure_s: 2.0 * REFERENCE_EXPOSURE_S,
            },
        )
        .unwrap();
        let lg2 = 10.0 * 2f64.log10();
        assert!((base[0].tts_level - long[0].tts_level - lg2).abs() < 1e-12);
        let ratio = long[0].tts_radius / base[0].tts_radius;
        assert!((ratio - 10f64.powf(lg2 / 20.0)).abs() < 1e-12);
    }

    #[test]
    fn assess_requires_species() {
        assert!(assess(Some(149.0), &[], &ExposureCriteria::default()).is_err());
    }

    #[test]
    fn species_validation() {
        let mut p = profile(60.0);
        p.gtv = 75.0;
        assert!(p.validate().is_err());
        let mut p = profile(60.0);
        p.audiogram.reverse();
        assert!(p.validate().is_err());
    }

    #[test]
    fn bundled_table_loads() {
        let sp = bundled_species();
        assert!(sp.len() >= 3);
        assert!(sp.iter().any(|s| s.group == SpeciesGroup::Mammal));
        assert!(sp.iter().any(|s| s.group == SpeciesGroup::Fish));
    }

    #[test]
    fn species_csv_round_trip() {
        let sp = bundled_species();
        let mut buf = Vec::new();
        write_species_csv(&sp, &mut buf).unwrap();
        let back = read_species_csv(buf.as_slice(), Path::new("mem")).unwrap();
        assert_eq!(back, sp);
    }

    #[test]
    fn species_csv_errors() {
        let bad_group = "name,group,gtv_db,audiogram\nx,bird,60,1000:70\n";
        assert!(read_species_csv(bad_group.as_bytes(), Path::new("m")).is_err());
        let bad_pair = "name,group,gtv_db,audiogram\nx,fish,60,1000-70\n";
        assert!(read_species_csv(bad_pair.as_bytes(), Path::new("m")).is_err());
        let high_gtv = "name,group,gtv_db,audiogram\nx,fish,80,1000:70\n";
        assert!(matches!(
            read_species_csv(high_gtv.as_bytes(), Path::new("m")),
            Err(Error::Parse { line: 2, .. })
        ));
    }
}
