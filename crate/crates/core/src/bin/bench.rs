use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mixdenoise::bench::{
    checkerboard_csv, checkerboard_study, make_checkerboard, run_experiment_with, scale_sweep,
    sweep_csv, ExperimentSpec, CHECKERBOARD_TILES,
};
use mixdenoise::imgcore::read_image;
use mixdenoise::multiscale::Method;
use mixdenoise::{MsConfig, TldConfig, TldDenoiser};

/// Benchmark harness for the TLD family of denoisers.
#[derive(Parser, Debug)]
#[command(name = "bench", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Run the (image, sigma, method) grid described by a spec file.
    Run {
        spec: PathBuf,
        /// Also write every denoised image under `<output>/images`.
        #[arg(long)]
        save_images: bool,
    },
    /// Regional PSNR of MTLD, MMTLD and FMMTLD on the synthetic checkerboard.
    Checkerboard {
        #[arg(long, default_value_t = 50.0)]
        sigma: f64,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
        /// Directory for `checkerboard.csv`.
        #[arg(long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        tld: TldArgs,
    },
    /// PSNR gain over single-scale TLD for J = K = 1..max-scales.
    Sweep {
        #[arg(long)]
        max_scales: usize,
        /// Clean input image; defaults to the synthetic checkerboard.
        #[arg(long)]
        image: Option<PathBuf>,
        #[arg(long, default_value_t = 50.0)]
        sigma: f64,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
        /// Directory for `sweep.csv`.
        #[arg(long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        tld: TldArgs,
    },
}

#[derive(Args, Debug)]
struct TldArgs {
    #[arg(long, default_value_t = 11)]
    patch: usize,
    #[arg(long, default_value_t = 1.04)]
    c: f64,
    #[arg(long, default_value_t = 12)]
    iters: usize,
    #[arg(long)]
    deterministic: bool,
}

impl TldArgs {
    fn config(&self) -> TldConfig {
        TldConfig {
            p: self.patch,
            c: self.c,
            iters: self.iters,
            deterministic: self.deterministic,
            ..TldConfig::default()
        }
    }
}

fn write_to(dir: &Option<PathBuf>, file: &str, text: &str) -> mixdenoise::Result<()> {
    if let Some(dir) = dir {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join(file), text)?;
    }
    Ok(())
}

fn run(cli: Cli) -> mixdenoise::Result<()> {
    match cli.cmd {
        Cmd::Run { spec, save_images } => {
            let spec = ExperimentSpec::from_file(spec)?;
            let denoiser = TldDenoiser::new(spec.tld.clone());
            let table = run_experiment_with(&spec, &denoiser, save_images)?;
            print!("{}", table.text_table());
            if let Some(missing) = table.meta_value("classic_missing") {
                eprintln!("note: classic images missing: {missing}");
            }
            println!("report written to {}", spec.output.display());
        }
        Cmd::Checkerboard { sigma, seed, output, tld } => {
            let cfg = tld.config();
            let ms = MsConfig {
                deterministic: cfg.deterministic,
                ..MsConfig::default()
            };
            let methods = [Method::Mtld, Method::Mmtld, Method::Fmmtld];
            let res = checkerboard_study(sigma, seed, &methods, &ms, &TldDenoiser::new(cfg))?;
            print!("{:<8}", "tile");
            for r in &res {
                print!(" {:>10}", r.method.label());
            }
            println!("   (PSNR gain over TLD, dB)");
            for (k, t) in CHECKERBOARD_TILES.iter().enumerate() {
                print!("{t:<8}");
                for r in &res {
                    print!(" {:>10.3}", r.gain[k]);
                }
                println!();
            }
            write_to(&output, "checkerboard.csv", &checkerboard_csv(&res)?)?;
        }
        Cmd::Sweep { max_scales, image, sigma, seed, output, tld } => {
            let clean = match image {
                Some(p) => read_image(p)?,
                None => make_checkerboard(),
            };
            let cfg = tld.config();
            let ms = MsConfig {
                deterministic: cfg.deterministic,
                ..MsConfig::default()
            };
            let rows = scale_sweep(&clean, sigma, max_scales, seed, &ms, &TldDenoiser::new(cfg))?;
            println!("{:<6} {:>10} {:>10} {:>10}   (PSNR gain over TLD, dB)", "J=K", "MTLD", "MMTLD", "FMMTLD");
            for r in &rows {
                println!("{:<6} {:>10.3} {:>10.3} {:>10.3}", r.scales, r.mtld, r.mmtld, r.fmmtld);
            }
            write_to(&output, "sweep.csv", &sweep_csv(&rows)?)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("bench: {e}");
            ExitCode::FAILURE
        }
    }
}
