use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use mixdenoise::imgcore::{add_gaussian_noise, psnr, read_image, ssim, write_image};
use mixdenoise::multiscale::Method;
use mixdenoise::{MsConfig, NoiseSpec, TldConfig, TldDenoiser};

/// Denoise a grayscale image with TLD or one of its multiscale compositions.
///
/// With `--seed` the input is treated as clean: Gaussian noise of level
/// `--sigma` is added first and PSNR/SSIM against the input are printed.
#[derive(Parser, Debug)]
#[command(name = "denoise", version)]
struct Args {
    /// Input image (PGM, PNG or raw .f64).
    input: PathBuf,
    /// Output image; the extension selects the format.
    output: PathBuf,
    /// Noise standard deviation in intensity units.
    #[arg(long)]
    sigma: f64,
    /// tld, mtld, mmtld, mmtld1, fmmtld or fmmtld1.
    #[arg(long, default_value = "mmtld")]
    method: String,
    /// Denoising-stage scales J.
    #[arg(long, default_value_t = 1)]
    scales: usize,
    /// Mixing-stage scales K (defaults to J).
    #[arg(long)]
    mix_scales: Option<usize>,
    /// Patch side.
    #[arg(long, default_value_t = 11)]
    patch: usize,
    /// Sparsity-control constant.
    #[arg(long, default_value_t = 1.04)]
    c: f64,
    /// Regularizer scale.
    #[arg(long, default_value_t = 0.031)]
    lambda0: f64,
    /// `total` (lambda0 * ||Y||^2) or `per-patch` (lambda0 * ||Y||^2 / N).
    #[arg(long, default_value = "total")]
    lambda_scale: String,
    /// Outer learning iterations.
    #[arg(long, default_value_t = 12)]
    iters: usize,
    /// Add seeded noise to the (clean) input before denoising.
    #[arg(long)]
    seed: Option<u64>,
    /// Also write the noisy image here (needs --seed).
    #[arg(long)]
    noisy_out: Option<PathBuf>,
    /// Single-threaded reference execution.
    #[arg(long)]
    deterministic: bool,
    /// Re-denoise already denoised FMMTLD levels, as in the literal algorithm.
    #[arg(long)]
    literal_fmmtld: bool,
}

fn run(args: Args) -> mixdenoise::Result<()> {
    let method: Method = args.method.parse()?;
    let tld = TldConfig {
        p: args.patch,
        c: args.c,
        lambda0: args.lambda0,
        lambda_scale: args.lambda_scale.parse()?,
        iters: args.iters,
        deterministic: args.deterministic,
        ..TldConfig::default()
    };
    let ms = MsConfig {
        scales: args.scales,
        mix_scales: args.mix_scales.unwrap_or(args.scales),
        literal_fmmtld: args.literal_fmmtld,
        deterministic: args.deterministic,
        ..MsConfig::default()
    };
    let input = read_image(&args.input)?;
    let (clean, noisy) = match args.seed {
        Some(seed) => {
            let noisy = add_gaussian_noise(&input, NoiseSpec::new(args.sigma, seed)?)?;
            if let Some(path) = &args.noisy_out {
                write_image(&noisy, path)?;
            }
            (Some(input), noisy)
        }
        None => (None, input),
    };
    let denoiser = TldDenoiser::new(tld);
    let start = Instant::now();
    let out = method.run(&noisy, args.sigma, &ms, &denoiser)?;
    let secs = start.elapsed().as_secs_f64();
    write_image(&out, &args.output)?;
    match clean {
        Some(clean) => println!(
            "{}: noisy {:.2} dB / {:.4}, denoised {:.2} dB / {:.4}, {:.1} s",
            method,
            psnr(&clean, &noisy)?,
            ssim(&clean, &noisy)?,
            psnr(&clean, &out)?,
            ssim(&clean, &out)?,
            secs
        ),
        None => println!("{method}: {secs:.1} s"),
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("denoise: {e}");
            ExitCode::FAILURE
        }
    }
}
