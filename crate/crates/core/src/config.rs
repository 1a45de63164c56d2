//! Filter configuration files.
//!
//! A configuration is plain `key = value` text; `#` starts a comment.
//! Required keys: `mode`, `Mxy`, `Mz`, `Mhat_xy`, `Mhat_z`, `Bxy`, `Bz`,
//! `Lhat_xy`, `Lhat_z`. Optional: `eq15b_Bz` (truncate the temporal sum of the
//! frequency-domain prediction to `|kz| <= eq15b_Bz`) and `target_amplitude`.

use std::path::Path;

use crate::engine::{ApplyPath, Mode, VelocityGrid};
use crate::error::{Error, Result};
use crate::kernels::FilterParams;

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub name: String,
    pub mode: Mode,
    pub mxy: usize,
    pub mz: usize,
    pub mhat_xy: usize,
    pub mhat_z: usize,
    pub bxy: usize,
    pub bz: usize,
    pub lhat_xy: usize,
    pub lhat_z: usize,
    pub eq15b_bz: Option<usize>,
    pub target_amplitude: Option<f64>,
}

/// Bundled configurations, in table order.
pub const PRESETS: [(&str, &str); 7] = [
    ("3D_SAT", include_str!("../configs/3D_SAT.cfg")),
    ("3D_LAT", include_str!("../configs/3D_LAT.cfg")),
    ("2D_LAT", include_str!("../configs/2D_LAT.cfg")),
    ("2D_LAT_FVG", include_str!("../configs/2D_LAT_FVG.cfg")),
    ("3D_DIV", include_str!("../configs/3D_DIV.cfg")),
    ("2D_DIV", include_str!("../configs/2D_DIV.cfg")),
    ("2D_DIV_FVG", include_str!("../configs/2D_DIV_FVG.cfg")),
];

const KEYS: [&str; 11] = [
    "mode",
    "Mxy",
    "Mz",
    "Mhat_xy",
    "Mhat_z",
    "Bxy",
    "Bz",
    "Lhat_xy",
    "Lhat_z",
    "eq15b_Bz",
    "target_amplitude",
];

fn err(line: usize, msg: impl Into<String>) -> Error {
    Error::Config { line, msg: msg.into() }
}

impl Config {
    pub fn parse(name: &str, text: &str) -> Result<Self> {
        let mut values: [Option<(usize, String)>; 11] = Default::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (k, v) = content
                .split_once('=')
                .ok_or_else(|| err(line, format!("expected 'key = value', got '{content}'")))?;
            let (k, v) = (k.trim(), v.trim());
            let slot = KEYS
                .iter()
                .position(|key| *key == k)
                .ok_or_else(|| err(line, format!("unknown key '{k}'")))?;
            if values[slot].is_some() {
                return Err(err(line, format!("duplicate key '{k}'")));
            }
            values[slot] = Some((line, v.to_string()));
        }
        let int = |slot: usize| -> Result<usize> {
            let (line, v) = values[slot]
                .as_ref()
                .ok_or_else(|| err(0, format!("missing key '{}'", KEYS[slot])))?;
            v.parse().map_err(|_| {
                err(
                    *line,
                    format!("'{}' must be a non-negative integer, got '{v}'", KEYS[slot]),
                )
            })
        };
        let mode = {
            let (line, v) = values[0].as_ref().ok_or_else(|| err(0, "missing key 'mode'"))?;
            v.parse::<Mode>()
                .map_err(|_| err(*line, format!("mode must be 3d or 2d, got '{v}'")))?
        };
        let eq15b_bz = values[9].is_some().then(|| int(9)).transpose()?;
        let target_amplitude = match &values[10] {
            Some((line, v)) => Some(
                v.parse::<f64>()
                    .ok()
                    .filter(|a| a.is_finite())
                    .ok_or_else(|| err(*line, format!("target_amplitude must be a number, got '{v}'")))?,
            ),
            None => None,
        };
        let cfg = Self {
            name: name.to_string(),
            mode,
            mxy: int(1)?,
            mz: int(2)?,
            mhat_xy: int(3)?,
            mhat_z: int(4)?,
            bxy: int(5)?,
            bz: int(6)?,
            lhat_xy: int(7)?,
            lhat_z: int(8)?,
            eq15b_bz,
            target_amplitude,
        };
        cfg.filter_params().map_err(|e| err(0, e.to_string()))?;
        if cfg.lhat_z == 0 {
            return Err(err(0, "Lhat_z must be positive"));
        }
        match (cfg.mode, cfg.mz) {
            (Mode::TwoD, mz) if mz != 1 => return Err(err(0, "2d mode requires Mz = 1")),
            (Mode::ThreeD, mz) if mz < 2 => return Err(err(0, "3d mode requires Mz >= 2")),
            _ => {}
        }
        cfg.apply_path()
            .validate(&cfg.filter_params()?)
            .map_err(|e| err(0, e.to_string()))?;
        Ok(cfg)
    }

    /// A bundled configuration by name; `/` and `_` are interchangeable.
    pub fn preset(name: &str) -> Option<Self> {
        let key = name.replace('/', "_").to_ascii_uppercase();
        PRESETS
            .iter()
            .find(|(n, _)| *n == key)
            .map(|(n, text)| Self::parse(n, text).expect("bundled configs are valid"))
    }

    /// A configuration file path, or a preset name when no such file exists.
    pub fn load(spec: &str) -> Result<Self> {
        let path = Path::new(spec);
        if path.is_file() {
            let name = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            return Self::parse(&name, &std::fs::read_to_string(path)?);
        }
        Self::preset(spec).ok_or_else(|| err(0, format!("'{spec}' is neither a config file nor a preset")))
    }

    pub fn all_presets() -> Vec<Self> {
        PRESETS
            .iter()
            .map(|(n, t)| Self::parse(n, t).expect("bundled configs are valid"))
            .collect()
    }

    pub fn filter_params(&self) -> Result<FilterParams> {
        FilterParams::edge(
            [self.mxy, self.mxy, self.mz],
            [self.mhat_xy, self.mhat_xy, self.mhat_z],
            [self.bxy, self.bxy, self.bz],
        )
    }

    pub fn grid(&self) -> VelocityGrid {
        VelocityGrid::new(self.lhat_xy, self.lhat_z)
    }

    pub fn apply_path(&self) -> ApplyPath {
        match self.eq15b_bz {
            Some(bz) => ApplyPath::Truncated { bz },
            None => ApplyPath::FullBand,
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = format!(
            "mode = {}\nMxy = {}\nMz = {}\nMhat_xy = {}\nMhat_z = {}\nBxy = {}\nBz = {}\nLhat_xy = {}\nLhat_z = {}\n",
            self.mode, self.mxy, self.mz, self.mhat_xy, self.mhat_z, self.bxy, self.bz, self.lhat_xy, self.lhat_z
        );
        if let Some(b) = self.eq15b_bz {
            s.push_str(&format!("eq15b_Bz = {b}\n"));
        }
        if let Some(a) = self.target_amplitude {
            s.push_str(&format!("target_amplitude = {a}\n"));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_match_table() {
        let want = [
            ("3D_SAT", Mode::ThreeD, [16, 8, 4, 2, 3, 4, 8, 4]),
            ("3D_LAT", Mode::ThreeD, [32, 16, 8, 2, 6, 8, 8, 4]),
            ("2D_LAT", Mode::TwoD, [32, 1, 8, 1, 6, 0, 8, 4]),
            ("2D_LAT_FVG", Mode::TwoD, [32, 1, 8, 1, 6, 0, 16, 8]),
            ("3D_DIV", Mode::ThreeD, [16, 8, 4, 2, 3, 4, 4, 4]),
            ("2D_DIV", Mode::TwoD, [16, 1, 4, 1, 3, 0, 4, 4]),
            ("2D_DIV_FVG", Mode::TwoD, [16, 1, 4, 1, 3, 0, 8, 8]),
        ];
        for (name, mode, v) in want {
            let c = Config::preset(name).unwrap();
            let got = [c.mxy, c.mz, c.mhat_xy, c.mhat_z, c.bxy, c.bz, c.lhat_xy, c.lhat_z];
            assert_eq!((c.mode, got), (mode, v), "{name}");
            assert_eq!(c.eq15b_bz, None);
        }
        assert_eq!(Config::preset("3d/sat").unwrap().name, "3D_SAT");
    }

    #[test]
    fn round_trips_through_text() {
        let mut c = Config::preset("3D_LAT").unwrap();
        c.eq15b_bz = Some(2);
        c.target_amplitude = Some(1.25);
        assert_eq!(Config::parse("3D_LAT", &c.to_text()).unwrap(), c);
    }

    #[test]
    fn rejects_bad_input() {
        let base = Config::preset("3D_SAT").unwrap().to_text();
        let unknown = format!("{base}colour = red\n");
        assert!(matches!(
            Config::parse("x", &unknown),
            Err(Error::Config { line: 10, .. })
        ));
        assert!(Config::parse("x", &base.replace("Bxy = 3", "Bxy = 8")).is_err());
        assert!(Config::parse("x", &base.replace("mode = 3d", "mode = 4d")).is_err());
        assert!(Config::parse("x", &base.replace("Mz = 8", "Mz = 1")).is_err());
        assert!(Config::parse("x", &base.replace("Lhat_z = 4\n", "")).is_err());
        assert!(Config::parse("x", &format!("{base}eq15b_Bz = 5\n")).is_err());
        assert!(Config::parse("x", &format!("{base}Mxy = 16\n")).is_err());
        assert!(Config::parse("x", "Mxy 16").is_err());
    }
}
