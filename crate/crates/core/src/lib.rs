//! Sparsifying-transform-learning image denoising (TLD) and its wavelet
//! subband-mixing multiscale extensions.
//!
//! The crate is organised as:
//!
//! * [`imgcore`]: images, overlapping patches, Gaussian noise, PSNR/SSIM, file I/O.
//! * [`wavelets`]: periodic 2-D DWT with a discrete Meyer bank and the isotropic
//!   undecimated (starlet) transform with the B3-spline kernel.
//! * [`tld`]: the single-scale transform-learning denoiser.
//! * [`multiscale`]: MTLD, MMTLD (two versions) and FMMTLD (two versions) over
//!   any [`multiscale::Denoiser`].
//! * [`bench`]: the experiment harness behind the `bench` binary.
//!
//! Inner loops over patches, rows and experiment cells run on rayon when the
//! `parallel` feature is enabled; every result is independent of the thread
//! count.

pub mod bench;
pub mod error;
pub mod imgcore;
pub mod multiscale;
pub mod par;
pub mod tld;
pub mod wavelets;

pub use error::{Error, Result};
pub use imgcore::{DenoiseReport, Image, NoiseSpec, PatchMatrix};
pub use multiscale::{Denoiser, MsConfig};
pub use par::Exec;
pub use tld::{LambdaScale, TldConfig, TldDenoiser, Transform};
pub use wavelets::{SubbandKind, SubbandSet};
