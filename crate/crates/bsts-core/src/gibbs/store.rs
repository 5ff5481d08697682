//! On-disk format for posterior draws: a columnar little-endian f64 binary
//! (`draws.bin`) next to a JSON description (`draws.json`).
//!
//! Streams are laid out chain by chain, each chain contributing, in order:
//! `tau_tilde` (M x T), `a_tilde` (M x T), `theta` (M x 4), `beta` (M x K),
//! optionally `beta_sparse` (M x K) and `gamma` (M x K, stored as 0/1),
//! `sigma_y2` (M), then the prior-scale block (horseshoe: `lambda2` M x K,
//! `nu2` M, `aux_local` M x K, `aux_global` M, `clamp_events` M; spike-and-
//! slab: `delta2` M x K, `pi0` M, `spike_factor` M). All matrices are
//! draw-major. The JSON carries the dimensions needed to read it back.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::{ChainDraws, PosteriorDraws, PriorKind, ScaleDraw};
use crate::error::{Error, Result};
use crate::shrinkage::{HorseshoeState, RegressionDraw, SsvsState};
use crate::state::{NcssStates, ThetaParams};

pub const DRAWS_SCHEMA: &str = "bsts.draws.v1";

/// Sidecar metadata for `draws.bin`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DrawsMeta {
    pub schema: String,
    pub prior: PriorKind,
    pub t_len: usize,
    pub n_columns: usize,
    pub n_chains: usize,
    pub kept_per_chain: usize,
    pub has_sparse: bool,
    pub has_gamma: bool,
}

struct Writer<W: Write> {
    inner: W,
}

impl<W: Write> Writer<W> {
    fn put(&mut self, v: f64) -> Result<()> {
        self.inner.write_all(&v.to_le_bytes())?;
        Ok(())
    }

    fn put_slice(&mut self, vs: &[f64]) -> Result<()> {
        for v in vs {
            self.put(*v)?;
        }
        Ok(())
    }
}

struct Reader<R: Read> {
    inner: R,
}

impl<R: Read> Reader<R> {
    fn take(&mut self) -> Result<f64> {
        let mut buf = [0u8; 8];
        self.inner.read_exact(&mut buf)?;
        Ok(f64::from_le_bytes(buf))
    }

    fn take_vec(&mut self, n: usize) -> Result<Vec<f64>> {
        (0..n).map(|_| self.take()).collect()
    }
}

/// Write `draws.bin` and `draws.json` into `dir`.
pub fn save_draws(dir: &Path, draws: &PosteriorDraws) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let kept = draws.kept_per_chain();
    let has_sparse = draws
        .chains
        .first()
        .and_then(|c| c.regression.first())
        .is_some_and(|r| r.beta_sparse.is_some());
    let has_gamma = draws
        .chains
        .first()
        .and_then(|c| c.regression.first())
        .is_some_and(|r| r.gamma.is_some());

    let meta = DrawsMeta {
        schema: DRAWS_SCHEMA.to_string(),
        prior: draws.prior_kind,
        t_len: draws.t_len,
        n_columns: draws.n_columns,
        n_chains: draws.n_chains(),
        kept_per_chain: kept,
        has_sparse,
        has_gamma,
    };
    let meta_file = File::create(dir.join("draws.json"))?;
    serde_json::to_writer_pretty(BufWriter::new(meta_file), &meta)?;

    let bin = File::create(dir.join("draws.bin"))?;
    let mut w = Writer {
        inner: BufWriter::new(bin),
    };
    for chain in &draws.chains {
        for s in &chain.states {
            w.put_slice(s.tau_tilde.as_slice())?;
        }
        for s in &chain.states {
            w.put_slice(s.a_tilde.as_slice())?;
        }
        for t in &chain.theta {
            w.put_slice(&t.as_array())?;
        }
        for r in &chain.regression {
            w.put_slice(r.beta.as_slice())?;
        }
        if has_sparse {
            for r in &chain.regression {
                let phi = r
                    .beta_sparse
                    .as_ref()
                    .ok_or_else(|| Error::Data("inconsistent sparse draws".into()))?;
                w.put_slice(phi.as_slice())?;
            }
        }
        if has_gamma {
            for r in &chain.regression {
                let g = r
                    .gamma
                    .as_ref()
                    .ok_or_else(|| Error::Data("inconsistent indicator draws".into()))?;
                for b in g {
                    w.put(if *b { 1.0 } else { 0.0 })?;
                }
            }
        }
        for r in &chain.regression {
            w.put(r.sigma_y2)?;
        }
        for scale in &chain.scales {
            match scale {
                ScaleDraw::Horseshoe(h) => {
                    w.put_slice(h.lambda2.as_slice())?;
                    w.put(h.nu2)?;
                    w.put_slice(h.aux_local.as_slice())?;
                    w.put(h.aux_global)?;
                    w.put(h.clamp_events as f64)?;
                }
                ScaleDraw::Ssvs(s) => {
                    w.put_slice(s.delta2.as_slice())?;
                    w.put(s.pi0)?;
                    w.put(s.spike_factor)?;
                }
            }
        }
    }
    w.inner.flush()?;
    Ok(())
}

/// Read a draw store written by [`save_draws`].
pub fn load_draws(dir: &Path) -> Result<PosteriorDraws> {
    let meta_file = File::open(dir.join("draws.json"))?;
    let meta: DrawsMeta = serde_json::from_reader(BufReader::new(meta_file))?;
    if meta.schema != DRAWS_SCHEMA {
        return Err(Error::Data(format!(
            "unsupported draw-store schema '{}' (expected {DRAWS_SCHEMA})",
            meta.schema
        )));
    }

    let bin = File::open(dir.join("draws.bin"))?;
    let mut r = Reader {
        inner: BufReader::new(bin),
    };
    let (t_len, k, kept) = (meta.t_len, meta.n_columns, meta.kept_per_chain);

    let mut chains = Vec::with_capacity(meta.n_chains);
    for _ in 0..meta.n_chains {
        let mut tau: Vec<Vec<f64>> = Vec::with_capacity(kept);
        for _ in 0..kept {
            tau.push(r.take_vec(t_len)?);
        }
        let mut a: Vec<Vec<f64>> = Vec::with_capacity(kept);
        for _ in 0..kept {
            a.push(r.take_vec(t_len)?);
        }
        let states = tau
            .into_iter()
            .zip(a)
            .map(|(t, a)| NcssStates::new(DVector::from_vec(t), DVector::from_vec(a)))
            .collect::<Result<Vec<_>>>()?;

        let mut theta = Vec::with_capacity(kept);
        for _ in 0..kept {
            let v = r.take_vec(4)?;
            theta.push(ThetaParams::from_array([v[0], v[1], v[2], v[3]]));
        }

        let mut betas = Vec::with_capacity(kept);
        for _ in 0..kept {
            betas.push(DVector::from_vec(r.take_vec(k)?));
        }
        let mut sparses: Vec<Option<DVector<f64>>> = vec![None; kept];
        if meta.has_sparse {
            for s in sparses.iter_mut() {
                *s = Some(DVector::from_vec(r.take_vec(k)?));
            }
        }
        let mut gammas: Vec<Option<Vec<bool>>> = vec![None; kept];
        if meta.has_gamma {
            for g in gammas.iter_mut() {
                *g = Some(r.take_vec(k)?.into_iter().map(|v| v != 0.0).collect());
            }
        }
        let mut sigmas = Vec::with_capacity(kept);
        for _ in 0..kept {
            sigmas.push(r.take()?);
        }
        let regression: Vec<RegressionDraw> = betas
            .into_iter()
            .zip(sparses)
            .zip(gammas)
            .zip(sigmas)
            .map(|(((beta, beta_sparse), gamma), sigma_y2)| RegressionDraw {
                beta,
                beta_sparse,
                gamma,
                sigma_y2,
            })
            .collect();

        let mut scales = Vec::with_capacity(kept);
        for i in 0..kept {
            match meta.prior {
                PriorKind::Ssvs => {
                    let delta2 = DVector::from_vec(r.take_vec(k)?);
                    let pi0 = r.take()?;
                    let spike_factor = r.take()?;
                    // indicators are shared with the regression stream
                    let gamma = regression_gamma(&regression, i)?;
                    scales.push(ScaleDraw::Ssvs(SsvsState {
                        gamma,
                        delta2,
                        pi0,
                        spike_factor,
                    }));
                }
                _ => {
                    let lambda2 = DVector::from_vec(r.take_vec(k)?);
                    let nu2 = r.take()?;
                    let aux_local = DVector::from_vec(r.take_vec(k)?);
                    let aux_global = r.take()?;
                    let clamp_events = r.take()? as u64;
                    scales.push(ScaleDraw::Horseshoe(HorseshoeState {
                        lambda2,
                        nu2,
                        aux_local,
                        aux_global,
                        clamp_events,
                    }));
                }
            }
        }

        chains.push(ChainDraws {
            states,
            theta,
            regression,
            scales,
        });
    }

    Ok(PosteriorDraws {
        prior_kind: meta.prior,
        t_len,
        n_columns: k,
        chains,
    })
}

fn regression_gamma(regression: &[RegressionDraw], i: usize) -> Result<Vec<bool>> {
    regression[i]
        .gamma
        .clone()
        .ok_or_else(|| Error::Data("spike-and-slab store is missing indicator draws".into()))
}
