//! Raw level series, the log-growth transform, and summary statistics.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use chrono::NaiveDate;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::stats::mean_var;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Observation {
    pub date: NaiveDate,
    pub value: Option<f64>,
}

/// Dated observations with possible gaps, in strictly increasing date order.
#[derive(Debug, Clone, PartialEq)]
pub struct RawSeries {
    observations: Vec<Observation>,
    source_id: String,
}

impl RawSeries {
    /// Fails with the 1-based position of the first observation whose date
    /// does not exceed its predecessor's.
    pub fn new(observations: Vec<Observation>, source_id: impl Into<String>) -> Result<Self> {
        if let Some(i) = observations.windows(2).position(|w| w[1].date <= w[0].date) {
            return Err(Error::NonMonotoneDates { row: i + 2 });
        }
        Ok(RawSeries { observations, source_id: source_id.into() })
    }

    pub fn observations(&self) -> &[Observation] {
        &self.observations
    }

    pub fn source_id(&self) -> &str {
        &self.source_id
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn present_count(&self) -> usize {
        self.observations.iter().filter(|o| o.value.is_some()).count()
    }

    /// Observations dated within `[start, end]` (either bound optional).
    pub fn between(&self, start: Option<NaiveDate>, end: Option<NaiveDate>) -> RawSeries {
        let observations = self
            .observations
            .iter()
            .filter(|o| start.is_none_or(|s| o.date >= s) && end.is_none_or(|e| o.date <= e))
            .copied()
            .collect();
        RawSeries { observations, source_id: self.source_id.clone() }
    }
}

/// The modelled sample `X_1, ..., X_n`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GrowthSeries {
    values: Vec<f64>,
    /// Date of the later observation of each ratio, when known.
    dates: Option<Vec<NaiveDate>>,
    provenance: String,
}

impl GrowthSeries {
    pub fn from_values(values: Vec<f64>, provenance: impl Into<String>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(GrowthSeries { values, dates: None, provenance: provenance.into() })
    }

    /// Like `from_values`, keeping one date per value.
    pub fn from_dated(values: Vec<f64>, dates: Vec<NaiveDate>, provenance: impl Into<String>) -> Result<Self> {
        if dates.len() != values.len() {
            return Err(crate::error::invalid("one date per value is required"));
        }
        let mut out = Self::from_values(values, provenance)?;
        out.dates = Some(dates);
        Ok(out)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dates(&self) -> Option<&[NaiveDate]> {
        self.dates.as_deref()
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    /// The series minus its sample mean, together with that mean.
    pub fn centered(&self) -> (GrowthSeries, f64) {
        let (mean, _) = mean_var(&self.values);
        let values = self.values.iter().map(|v| v - mean).collect();
        let out = GrowthSeries {
            values,
            dates: self.dates.clone(),
            provenance: format!("{} (centered)", self.provenance),
        };
        (out, mean)
    }

    /// Levels `1, e^{X_1}, e^{X_1 + X_2}, ...` whose log growth is this series.
    pub fn cumulative_levels(&self, start: f64) -> Vec<f64> {
        let mut level = start;
        let mut out = Vec::with_capacity(self.values.len() + 1);
        out.push(level);
        for x in &self.values {
            level *= x.exp();
            out.push(level);
        }
        out
    }
}

/// `ln(v[t+1] / v[t])` over consecutive present values; gaps are dropped
/// first, so `n = present - 1`.
pub fn log_growth(raw: &RawSeries) -> Result<GrowthSeries> {
    let present: Vec<(NaiveDate, f64)> = raw
        .observations
        .iter()
        .filter_map(|o| o.value.map(|v| (o.date, v)))
        .collect();
    if present.len() < 2 {
        return Err(Error::NotEnoughValues { needed: 2, found: present.len() });
    }
    for (i, &(date, v)) in present.iter().enumerate() {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::NonPositiveLevel {
                index: i,
                value: v,
                date: format!(" ({date})"),
            });
        }
    }
    let values = present.windows(2).map(|w| (w[1].1 / w[0].1).ln()).collect();
    let dates = present[1..].iter().map(|(d, _)| *d).collect();
    Ok(GrowthSeries {
        values,
        dates: Some(dates),
        provenance: format!("log growth of {}", raw.source_id),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    /// Population variance (divide by n).
    pub variance: f64,
    pub min: f64,
    pub max: f64,
    pub max_squared_value: f64,
}

pub fn summary(series: &GrowthSeries) -> Result<Summary> {
    let v = series.values();
    if v.is_empty() {
        return Err(Error::NotEnoughValues { needed: 1, found: 0 });
    }
    let (mean, variance) = mean_var(v);
    let min = v.iter().copied().fold(f64::INFINITY, f64::min);
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let max_squared_value = v.iter().map(|x| x * x).fold(0.0, f64::max);
    Ok(Summary { n: v.len(), mean, variance, min, max, max_squared_value })
}

impl core::fmt::Display for Summary {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(
            f,
            "n={} mean={:.3e} var={:.3e} min={:.4} max={:.4} max_sq={:.4}",
            self.n, self.mean, self.variance, self.min, self.max, self.max_squared_value
        )
    }
}

impl core::fmt::Display for Observation {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self.value {
            Some(v) => write!(f, "{},{}", self.date, v),
            None => write!(f, "{},", self.date),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn day(i: i64) -> NaiveDate {
        NaiveDate::from_ymd_opt(2000, 1, 1).unwrap() + chrono::Duration::days(i)
    }

    fn raw(values: &[Option<f64>]) -> RawSeries {
        let obs = values
            .iter()
            .enumerate()
            .map(|(i, &value)| Observation { date: day(i as i64), value })
            .collect();
        RawSeries::new(obs, "test").unwrap()
    }

    #[test]
    fn zero_growth() {
        let g = log_growth(&raw(&[Some(100.0), Some(100.0)])).unwrap();
        assert_eq!(g.values(), &[0.0]);
        assert_eq!(g.n(), 1);
    }

    #[test]
    fn unit_growth() {
        let e = core::f64::consts::E;
        let g = log_growth(&raw(&[Some(1.0), Some(e), Some(e)])).unwrap();
        assert!((g.values()[0] - 1.0).abs() < 1e-15);
        assert_eq!(g.values()[1], 0.0);
    }

    #[test]
    fn gaps_are_dropped() {
        let g = log_growth(&raw(&[Some(1.0), None, Some(2.0), None, None, Some(4.0)])).unwrap();
        assert_eq!(g.n(), 2);
        assert_eq!(g.dates().unwrap(), &[day(2), day(5)]);
    }

    #[test]
    fn errors() {
        assert!(matches!(log_growth(&raw(&[Some(1.0), None])), Err(Error::NotEnoughValues { .. })));
        let err = log_growth(&raw(&[Some(1.0), Some(0.0)])).unwrap_err();
        assert!(matches!(err, Error::NonPositiveLevel { index: 1, .. }));
        let obs = vec![
            Observation { date: day(0), value: Some(1.0) },
            Observation { date: day(2), value: Some(1.0) },
            Observation { date: day(1), value: Some(1.0) },
        ];
        assert_eq!(RawSeries::new(obs, "x").unwrap_err(), Error::NonMonotoneDates { row: 3 });
    }

    #[test]
    fn summary_examples() {
        let s = summary(&GrowthSeries::from_values(vec![1.0, -1.0], "t").unwrap()).unwrap();
        assert_eq!((s.n, s.mean, s.variance, s.max_squared_value), (2, 0.0, 1.0, 1.0));
        let z = summary(&GrowthSeries::from_values(vec![0.0; 3], "t").unwrap()).unwrap();
        assert_eq!((z.mean, z.variance, z.min, z.max, z.max_squared_value), (0.0, 0.0, 0.0, 0.0, 0.0));
        assert!(summary(&GrowthSeries::from_values(vec![], "t").unwrap()).is_err());
    }

    proptest! {
        #[test]
        fn growth_round_trip(xs in proptest::collection::vec(-0.5f64..0.5, 1..200)) {
            let g = GrowthSeries::from_values(xs.clone(), "p").unwrap();
            let levels = g.cumulative_levels(1.0);
            let r = raw(&levels.iter().map(|&v| Some(v)).collect::<Vec<_>>());
            let back = log_growth(&r).unwrap();
            for (a, b) in back.values().iter().zip(&xs) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }

        #[test]
        fn missing_pattern_count(mask in proptest::collection::vec(any::<bool>(), 2..100)) {
            let vals: Vec<Option<f64>> = mask.iter().enumerate()
                .map(|(i, &keep)| keep.then_some(1.0 + i as f64))
                .collect();
            let present = mask.iter().filter(|&&k| k).count();
            match log_growth(&raw(&vals)) {
                Ok(g) => {
                    prop_assert_eq!(g.n(), present - 1);
                    // survivors keep their order: levels increase so growth is positive
                    prop_assert!(g.values().iter().all(|&v| v > 0.0));
                }
                Err(_) => prop_assert!(present < 2),
            }
        }
    }
}
