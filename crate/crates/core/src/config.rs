//! Plain-text key-value configuration files.
//!
//! Format: one `key = value` pair per line, `#` starts a comment, blank lines
//! ignored. Consumers pull typed values by key; whatever nobody consumed can
//! be reported as unknown keys so typos fail loudly instead of silently
//! keeping a default.

use crate::error::{Error, Result};
use crate::linkmodel::LinkSpec;
use std::collections::BTreeMap;

#[derive(Debug, Clone, Default)]
pub struct KeyValueConfig {
    entries: BTreeMap<String, String>,
    consumed: std::collections::BTreeSet<String>,
}

impl KeyValueConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(p) => &raw[..p],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::BadConfig(format!("line {}: expected 'key = value'", idx + 1))
            })?;
            let key = k.trim().to_string();
            if entries.insert(key.clone(), v.trim().to_string()).is_some() {
                return Err(Error::BadConfig(format!(
                    "line {}: duplicate key '{key}'",
                    idx + 1
                )));
            }
        }
        Ok(KeyValueConfig {
            entries,
            consumed: Default::default(),
        })
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.display().to_string(),
            msg: e.to_string(),
        })?;
        Self::parse(&text)
    }

    pub fn get_str(&mut self, key: &str) -> Option<String> {
        let v = self.entries.get(key).cloned();
        if v.is_some() {
            self.consumed.insert(key.to_string());
        }
        v
    }

    pub fn get_f64(&mut self, key: &str) -> Result<Option<f64>> {
        match self.get_str(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| Error::BadConfig(format!("key '{key}': bad number '{v}'"))),
        }
    }

    pub fn get_usize(&mut self, key: &str) -> Result<Option<usize>> {
        match self.get_str(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| Error::BadConfig(format!("key '{key}': bad integer '{v}'"))),
        }
    }

    /// Keys present in the file that no consumer asked for.
    pub fn unconsumed_keys(&self) -> Vec<String> {
        self.entries
            .keys()
            .filter(|k| !self.consumed.contains(*k))
            .cloned()
            .collect()
    }

    /// Errors if any key was never consumed.
    pub fn ensure_fully_consumed(&self) -> Result<()> {
        let leftover = self.unconsumed_keys();
        if leftover.is_empty() {
            Ok(())
        } else {
            Err(Error::BadConfig(format!(
                "unknown keys: {}",
                leftover.join(", ")
            )))
        }
    }
}

/// Builds a LinkSpec from a config, starting from the reference system and
/// overriding whichever keys are present.
///
/// Recognized keys: symbol_rate_gbaud, wdm_channels, channel_spacing_ghz,
/// rrc_rolloff, attenuation_db_per_km, dispersion_ps_nm_km, gamma_per_w_km,
/// span_length_km, edfa_noise_figure_db, n_spans, center_wavelength_nm.
pub fn link_from_config(cfg: &mut KeyValueConfig) -> Result<LinkSpec> {
    let mut link = LinkSpec::reference();
    if let Some(v) = cfg.get_f64("symbol_rate_gbaud")? {
        link.symbol_rate_ghz = v;
    }
    if let Some(v) = cfg.get_usize("wdm_channels")? {
        link.n_channels = v;
    }
    if let Some(v) = cfg.get_f64("channel_spacing_ghz")? {
        link.spacing_ghz = v;
    }
    if let Some(v) = cfg.get_f64("rrc_rolloff")? {
        link.rrc_rolloff = v;
    }
    if let Some(v) = cfg.get_f64("attenuation_db_per_km")? {
        link.fiber.atten_db_per_km = v;
    }
    if let Some(v) = cfg.get_f64("dispersion_ps_nm_km")? {
        link.fiber.dispersion_ps_nm_km = v;
    }
    if let Some(v) = cfg.get_f64("gamma_per_w_km")? {
        link.fiber.gamma_per_w_km = v;
    }
    if let Some(v) = cfg.get_f64("span_length_km")? {
        link.fiber.span_km = v;
    }
    if let Some(v) = cfg.get_f64("edfa_noise_figure_db")? {
        link.edfa_nf_db = v;
    }
    if let Some(v) = cfg.get_usize("n_spans")? {
        link.n_spans = v;
    }
    if let Some(v) = cfg.get_f64("center_wavelength_nm")? {
        link.center_wavelength_nm = v;
    }
    link.validate()?;
    Ok(link)
}
