use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// Metrics of one (image, sigma, method) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub image: String,
    pub sigma: f64,
    pub method: String,
    pub noisy_psnr: f64,
    pub psnr: f64,
    pub ssim: f64,
    /// Wall-clock seconds of the denoise call.
    pub runtime: f64,
}

/// Per (method, sigma) arithmetic means over images.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanRow {
    pub method: String,
    pub sigma: f64,
    pub count: usize,
    pub psnr: f64,
    pub ssim: f64,
    pub runtime: f64,
}

/// Per-image results plus the environment they were produced in.
///
/// On disk a table is a directory holding `results.csv` (quality metrics,
/// byte-identical across runs of the same spec), `runtimes.csv`,
/// `summary.csv`, `meta.txt` and the human-readable `table.txt`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ReportTable {
    pub rows: Vec<ReportRow>,
    /// Ordered key/value metadata (thread count, config hash, generator, ...).
    pub meta: Vec<(String, String)>,
}

pub const RESULTS_CSV: &str = "results.csv";
pub const RUNTIMES_CSV: &str = "runtimes.csv";
pub const SUMMARY_CSV: &str = "summary.csv";
pub const META_TXT: &str = "meta.txt";
pub const TABLE_TXT: &str = "table.txt";

fn float(field: &str, what: &str) -> Result<f64> {
    field
        .parse()
        .map_err(|_| Error::Format(format!("{what}: bad number `{field}`")))
}

impl ReportTable {
    pub fn meta_value(&self, key: &str) -> Option<&str> {
        self.meta
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    /// Methods in order of first appearance.
    pub fn methods(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.method) {
                out.push(r.method.clone());
            }
        }
        out
    }

    /// Sigmas in order of first appearance.
    pub fn sigmas(&self) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for r in &self.rows {
            if !out.iter().any(|s| s.to_bits() == r.sigma.to_bits()) {
                out.push(r.sigma);
            }
        }
        out
    }

    pub fn means(&self) -> Vec<MeanRow> {
        let mut out = Vec::new();
        for method in self.methods() {
            for sigma in self.sigmas() {
                let cells: Vec<&ReportRow> = self
                    .rows
                    .iter()
                    .filter(|r| r.method == method && r.sigma.to_bits() == sigma.to_bits())
                    .collect();
                if cells.is_empty() {
                    continue;
                }
                let k = cells.len() as f64;
                out.push(MeanRow {
                    method: method.clone(),
                    sigma,
                    count: cells.len(),
                    psnr: cells.iter().map(|r| r.psnr).sum::<f64>() / k,
                    ssim: cells.iter().map(|r| r.ssim).sum::<f64>() / k,
                    runtime: cells.iter().map(|r| r.runtime).sum::<f64>() / k,
                });
            }
        }
        out
    }

    pub fn mean(&self, method: &str, sigma: f64) -> Option<MeanRow> {
        self.means()
            .into_iter()
            .find(|m| m.method == method && m.sigma.to_bits() == sigma.to_bits())
    }

    pub fn results_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["image", "sigma", "method", "noisy_psnr", "psnr", "ssim"])?;
        for r in &self.rows {
            w.write_record([
                r.image.clone(),
                r.sigma.to_string(),
                r.method.clone(),
                r.noisy_psnr.to_string(),
                r.psnr.to_string(),
                r.ssim.to_string(),
            ])?;
        }
        finish(w)
    }

    pub fn runtimes_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["image", "sigma", "method", "runtime_s"])?;
        for r in &self.rows {
            w.write_record([
                r.image.clone(),
                r.sigma.to_string(),
                r.method.clone(),
                r.runtime.to_string(),
            ])?;
        }
        finish(w)
    }

    pub fn summary_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["method", "sigma", "images", "mean_psnr", "mean_ssim"])?;
        for m in self.means() {
            w.write_record([
                m.method,
                m.sigma.to_string(),
                m.count.to_string(),
                m.psnr.to_string(),
                m.ssim.to_string(),
            ])?;
        }
        finish(w)
    }

    pub fn meta_text(&self) -> String {
        self.meta
            .iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }

    /// Mean PSNR / SSIM per method and sigma, followed by the per-image breakdown.
    pub fn text_table(&self) -> String {
        let sigmas = self.sigmas();
        let means = self.means();
        let mut s = String::new();
        let _ = write!(s, "{:<10}", "method");
        for sigma in &sigmas {
            let _ = write!(s, " {:>16}", format!("sigma={sigma}"));
        }
        let _ = writeln!(s, " {:>12}", "runtime[s]");
        for method in self.methods() {
            let _ = write!(s, "{method:<10}");
            let mut rt = Vec::new();
            for sigma in &sigmas {
                match means
                    .iter()
                    .find(|m| m.method == method && m.sigma.to_bits() == sigma.to_bits())
                {
                    Some(m) => {
                        let _ = write!(s, " {:>16}", format!("{:.2} / {:.4}", m.psnr, m.ssim));
                        rt.push(m.runtime);
                    }
                    None => {
                        let _ = write!(s, " {:>16}", "-");
                    }
                }
            }
            let mean_rt = rt.iter().sum::<f64>() / rt.len().max(1) as f64;
            let _ = writeln!(s, " {mean_rt:>12.2}");
        }
        let _ = writeln!(s, "\nper image (PSNR dB / SSIM)");
        let mut by_image: BTreeMap<(&str, u64), Vec<&ReportRow>> = BTreeMap::new();
        for r in &self.rows {
            by_image.entry((&r.image, r.sigma.to_bits())).or_default().push(r);
        }
        for ((image, _), rows) in by_image {
            let _ = write!(s, "{image:<14} sigma={:<4} noisy {:.2}", rows[0].sigma, rows[0].noisy_psnr);
            for r in rows {
                let _ = write!(s, "  {} {:.2}/{:.4}", r.method, r.psnr, r.ssim);
            }
            s.push('\n');
        }
        s
    }

    /// Writes every report file into `dir`, creating it if needed.
    pub fn write_dir(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join(RESULTS_CSV), self.results_csv()?)?;
        std::fs::write(dir.join(RUNTIMES_CSV), self.runtimes_csv()?)?;
        std::fs::write(dir.join(SUMMARY_CSV), self.summary_csv()?)?;
        std::fs::write(dir.join(META_TXT), self.meta_text())?;
        std::fs::write(dir.join(TABLE_TXT), self.text_table())?;
        Ok(())
    }

    /// Rebuilds a table from `results.csv`, `runtimes.csv` and `meta.txt`.
    pub fn read_dir(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let results = std::fs::read_to_string(dir.join(RESULTS_CSV))?;
        let runtimes = std::fs::read_to_string(dir.join(RUNTIMES_CSV))?;
        let meta = std::fs::read_to_string(dir.join(META_TXT))?;
        Self::parse(&results, &runtimes, &meta)
    }

    pub fn parse(results: &str, runtimes: &str, meta: &str) -> Result<Self> {
        let mut rows = Vec::new();
        let mut rd = csv::Reader::from_reader(results.as_bytes());
        for rec in rd.records() {
            let rec = rec?;
            if rec.len() != 6 {
                return Err(Error::Format(format!("{RESULTS_CSV}: expected 6 fields")));
            }
            rows.push(ReportRow {
                image: rec[0].to_string(),
                sigma: float(&rec[1], RESULTS_CSV)?,
                method: rec[2].to_string(),
                noisy_psnr: float(&rec[3], RESULTS_CSV)?,
                psnr: float(&rec[4], RESULTS_CSV)?,
                ssim: float(&rec[5], RESULTS_CSV)?,
                runtime: 0.0,
            });
        }
        let mut rd = csv::Reader::from_reader(runtimes.as_bytes());
        let mut n = 0;
        for rec in rd.records() {
            let rec = rec?;
            let row = rows
                .get_mut(n)
                .ok_or_else(|| Error::Format(format!("{RUNTIMES_CSV}: more rows than results")))?;
            if rec.len() != 4 || rec[0] != row.image || rec[2] != row.method {
                return Err(Error::Format(format!("{RUNTIMES_CSV}: row {n} does not match results")));
            }
            row.runtime = float(&rec[3], RUNTIMES_CSV)?;
            n += 1;
        }
        if n != rows.len() {
            return Err(Error::Format(format!("{RUNTIMES_CSV}: fewer rows than results")));
        }
        let meta = meta
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| {
                l.split_once(" = ")
                    .map(|(k, v)| (k.to_string(), v.to_string()))
                    .ok_or_else(|| Error::Format(format!("{META_TXT}: bad line `{l}`")))
            })
            .collect::<Result<_>>()?;
        Ok(Self { rows, meta })
    }
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Format(format!("csv flush: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::Format(e.to_string()))
}
