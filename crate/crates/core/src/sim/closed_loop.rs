use serde::{Deserialize, Serialize};

use super::record::{FineRecord, SampledRecord};
use super::signals::{channel_rng, gen_square_wave, ExcitationSpec, NoiseSpec};
use crate::error::{Error, Result};
use crate::lti::{c2d_zoh, closed_loop_assemble, StateSpace};

/// Time grid, seed and exogenous signals for one closed-loop run.
///
/// Excitations and noises are listed per channel: `excitation_u` and
/// `noise_w` per plant input, `excitation_y` and `noise_eta` per output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub fine_step: f64,
    pub t_start: f64,
    pub t_end: f64,
    pub seed: u64,
    pub excitation_u: Vec<ExcitationSpec>,
    pub excitation_y: Vec<ExcitationSpec>,
    pub noise_w: Vec<NoiseSpec>,
    pub noise_eta: Vec<NoiseSpec>,
    /// Also run the noise-free recursion and keep its taps.
    #[serde(default)]
    pub record_clean: bool,
}

/// Integer `a / b`, if `a` is a whole multiple of `b` to 1e-9 relative.
pub fn whole_ratio(a: f64, b: f64) -> Option<usize> {
    let r = a / b;
    let k = r.round();
    if k >= 0.0 && (r - k).abs() <= 1e-9 * k.max(1.0) {
        Some(k as usize)
    } else {
        None
    }
}

impl SimulationConfig {
    pub fn steps(&self) -> Result<usize> {
        if !(self.fine_step > 0.0 && self.fine_step.is_finite()) {
            return Err(Error::InvalidArgument(format!("fine step must be positive, got {}", self.fine_step)));
        }
        if !(self.t_start < self.t_end) {
            return Err(Error::InvalidArgument("t_start must precede t_end".into()));
        }
        whole_ratio(self.t_end - self.t_start, self.fine_step)
            .filter(|&n| n > 0)
            .ok_or(Error::NonCommensurate { h: self.t_end - self.t_start, step: self.fine_step })
    }

    fn validate(&self, m: usize, l: usize) -> Result<usize> {
        let n = self.steps()?;
        let counts = [
            ("excitation_u", self.excitation_u.len(), m),
            ("excitation_y", self.excitation_y.len(), l),
            ("noise_w", self.noise_w.len(), m),
            ("noise_eta", self.noise_eta.len(), l),
        ];
        for (name, got, want) in counts {
            if got != want {
                return Err(Error::Dimension(format!("{name} has {got} channels, loop needs {want}")));
            }
        }
        for e in self.excitation_u.iter().chain(&self.excitation_y) {
            e.validate()?;
        }
        for s in self.noise_w.iter().chain(&self.noise_eta) {
            s.validate()?;
            if let Some(hold) = s.hold_step {
                whole_ratio(hold, self.fine_step)
                    .filter(|&k| k > 0)
                    .ok_or(Error::NonCommensurate { h: hold, step: self.fine_step })?;
            }
        }
        Ok(n)
    }
}

/// Small dense row-major linear map, cheaper than a general matrix type in
/// the per-step loop.
struct Dense {
    rows: usize,
    cols: usize,
    v: Vec<f64>,
}

impl Dense {
    fn from(m: &nalgebra::DMatrix<f64>) -> Self {
        let (rows, cols) = m.shape();
        let v = (0..rows).flat_map(|i| (0..cols).map(move |j| (i, j))).map(|(i, j)| m[(i, j)]).collect();
        Self { rows, cols, v }
    }

    #[inline]
    fn apply_add(&self, x: &[f64], out: &mut [f64]) {
        for i in 0..self.rows {
            let row = &self.v[i * self.cols..(i + 1) * self.cols];
            out[i] += row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
        }
    }
}

/// Exact sampled closed loop at a fixed fine step, reusable across runs.
pub struct LoopSimulator {
    ad: Dense,
    bd: Dense,
    cd: Dense,
    dd: Dense,
    step: f64,
    m: usize,
    l: usize,
}

/// Per-step sink: sample index, then `[u; y]` for the noisy run and,
/// when requested, the noise-free run.
type Sink<'a> = dyn FnMut(usize, &[f64], Option<&[f64]>) + 'a;

impl LoopSimulator {
    pub fn new(p: &StateSpace, k: &StateSpace, fine_step: f64) -> Result<Self> {
        let cl = closed_loop_assemble(p, k)?;
        let d = c2d_zoh(&cl, fine_step)?;
        Ok(Self {
            ad: Dense::from(&d.ad),
            bd: Dense::from(&d.bd),
            cd: Dense::from(&d.cd),
            dd: Dense::from(&d.dd),
            step: fine_step,
            m: p.inputs(),
            l: p.outputs(),
        })
    }

    pub fn inputs(&self) -> usize {
        self.m
    }

    pub fn outputs(&self) -> usize {
        self.l
    }

    fn run(&self, cfg: &SimulationConfig, sink: &mut Sink<'_>) -> Result<usize> {
        if (cfg.fine_step - self.step).abs() > 1e-12 * self.step {
            return Err(Error::InvalidArgument(format!(
                "simulator built for step {}, config asks for {}",
                self.step, cfg.fine_step
            )));
        }
        let (m, l) = (self.m, self.l);
        let n = cfg.validate(m, l)?;
        let step = cfg.fine_step;
        let nx = self.ad.rows;
        let nin = 2 * (m + l);
        let noises: Vec<&NoiseSpec> = cfg.noise_w.iter().chain(&cfg.noise_eta).collect();
        let holds: Vec<usize> = noises
            .iter()
            .map(|s| s.hold_step.and_then(|h| whole_ratio(h, step)).unwrap_or(1))
            .collect();
        let mut rngs: Vec<_> = (0..noises.len()).map(|c| channel_rng(cfg.seed, 1 + c as u64)).collect();
        let refs: Vec<ExcitationSpec> =
            cfg.excitation_u.iter().chain(&cfg.excitation_y).map(|e| e.snapped(step)).collect();

        let mut x = vec![0.0; nx];
        let mut xc = vec![0.0; if cfg.record_clean { nx } else { 0 }];
        let mut v = vec![0.0; nin];
        let mut vc = vec![0.0; nin];
        let mut held = vec![0.0; noises.len()];
        let mut out = vec![0.0; m + l];
        let mut outc = vec![0.0; m + l];
        let mut next = vec![0.0; nx];

        for k in 0..=n {
            let tk = cfg.t_start + k as f64 * step;
            let tm = tk + 0.5 * step;
            for (c, e) in refs.iter().enumerate() {
                v[c] = gen_square_wave(e, tm);
            }
            for (c, s) in noises.iter().enumerate() {
                if k % holds[c] == 0 {
                    held[c] = s.draw(&mut rngs[c]);
                }
                v[m + l + c] = held[c];
            }

            out.iter_mut().for_each(|o| *o = 0.0);
            self.cd.apply_add(&x, &mut out);
            self.dd.apply_add(&v, &mut out);
            if out.iter().any(|o| !o.is_finite()) {
                return Err(Error::NonFinite(format!("closed-loop state diverged at step {k}")));
            }
            if cfg.record_clean {
                vc[..m + l].copy_from_slice(&v[..m + l]);
                outc.iter_mut().for_each(|o| *o = 0.0);
                self.cd.apply_add(&xc, &mut outc);
                self.dd.apply_add(&vc, &mut outc);
                sink(k, &out, Some(&outc));
            } else {
                sink(k, &out, None);
            }

            if k < n {
                next.iter_mut().for_each(|o| *o = 0.0);
                self.ad.apply_add(&x, &mut next);
                self.bd.apply_add(&v, &mut next);
                std::mem::swap(&mut x, &mut next);
                if cfg.record_clean {
                    next.iter_mut().for_each(|o| *o = 0.0);
                    self.ad.apply_add(&xc, &mut next);
                    self.bd.apply_add(&vc, &mut next);
                    std::mem::swap(&mut xc, &mut next);
                }
            }
        }
        Ok(n)
    }

    /// Full fine-grid record.
    pub fn simulate(&self, cfg: &SimulationConfig) -> Result<FineRecord> {
        let (m, l) = (self.m, self.l);
        let cap = cfg.steps()? + 1;
        let mut u = vec![Vec::with_capacity(cap); m];
        let mut y = vec![Vec::with_capacity(cap); l];
        let clean_cap = if cfg.record_clean { cap } else { 0 };
        let mut uc = vec![Vec::with_capacity(clean_cap); m];
        let mut yc = vec![Vec::with_capacity(clean_cap); l];
        self.run(cfg, &mut |_, out, clean| {
            for c in 0..m {
                u[c].push(out[c]);
            }
            for c in 0..l {
                y[c].push(out[m + c]);
            }
            if let Some(oc) = clean {
                for c in 0..m {
                    uc[c].push(oc[c]);
                }
                for c in 0..l {
                    yc[c].push(oc[m + c]);
                }
            }
        })?;
        let (u_clean, y_clean) = if cfg.record_clean { (Some(uc), Some(yc)) } else { (None, None) };
        Ok(FineRecord { t0: cfg.t_start, step: cfg.fine_step, u, y, u_clean, y_clean })
    }

    /// Sampled records at each interval in `hs`, starting at `retain_from`,
    /// without storing the fine grid. Equivalent to `simulate` followed by
    /// `decimate` for every `h`.
    pub fn simulate_sampled(
        &self,
        cfg: &SimulationConfig,
        hs: &[f64],
        retain_from: f64,
    ) -> Result<Vec<SampledRecord>> {
        let (m, l) = (self.m, self.l);
        let n = cfg.steps()?;
        let start = whole_ratio(retain_from - cfg.t_start, cfg.fine_step)
            .filter(|&s| s <= n)
            .ok_or_else(|| Error::InvalidArgument(format!("retain_from {retain_from} is not on the fine grid")))?;
        let mut factors = Vec::with_capacity(hs.len());
        let mut recs = Vec::with_capacity(hs.len());
        for &h in hs {
            let f = whole_ratio(h, cfg.fine_step)
                .filter(|&f| f > 0)
                .ok_or(Error::NonCommensurate { h, step: cfg.fine_step })?;
            let len = (n - start) / f + 1;
            factors.push(f);
            recs.push(SampledRecord {
                h,
                t0: retain_from,
                u: vec![Vec::with_capacity(len); m],
                y: vec![Vec::with_capacity(len); l],
            });
        }
        self.run(cfg, &mut |k, out, _| {
            if k < start {
                return;
            }
            for (rec, &f) in recs.iter_mut().zip(&factors) {
                if (k - start) % f == 0 {
                    for c in 0..m {
                        rec.u[c].push(out[c]);
                    }
                    for c in 0..l {
                        rec.y[c].push(out[m + c]);
                    }
                }
            }
        })?;
        Ok(recs)
    }
}

/// One exact propagation of the loop `(P, K)` on the fine grid.
pub fn simulate_closed_loop(p: &StateSpace, k: &StateSpace, cfg: &SimulationConfig) -> Result<FineRecord> {
    LoopSimulator::new(p, k, cfg.fine_step)?.simulate(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lti::{realize_siso, RationalTransfer};
    use crate::poly::Polynomial;

    fn lag() -> StateSpace {
        realize_siso(
            &RationalTransfer::new(Polynomial::new(vec![1.0]), Polynomial::new(vec![1.0, 1.0])).unwrap(),
        )
    }

    fn step_cfg() -> SimulationConfig {
        SimulationConfig {
            fine_step: 1e-3,
            t_start: 0.0,
            t_end: 5.0,
            seed: 3,
            excitation_u: vec![ExcitationSpec::square(100.0, 1.0, 0.0)],
            excitation_y: vec![ExcitationSpec::zero()],
            noise_w: vec![NoiseSpec::none()],
            noise_eta: vec![NoiseSpec::none()],
            record_clean: false,
        }
    }

    #[test]
    fn open_loop_step_response() {
        let k = StateSpace::static_gain(nalgebra::DMatrix::zeros(1, 1));
        let rec = simulate_closed_loop(&lag(), &k, &step_cfg()).unwrap();
        for (i, y) in rec.y[0].iter().enumerate() {
            let t = rec.time(i);
            assert!((y - (1.0 - (-t).exp())).abs() < 1e-9, "t = {t}");
        }
        assert!(rec.u[0].iter().all(|&u| u == 1.0));
    }

    #[test]
    fn streaming_matches_decimation() {
        let k = StateSpace::static_gain(nalgebra::DMatrix::from_element(1, 1, 0.5));
        let mut cfg = step_cfg();
        cfg.noise_eta = vec![NoiseSpec::white(0.1)];
        let sim = LoopSimulator::new(&lag(), &k, cfg.fine_step).unwrap();
        let fine = sim.simulate(&cfg).unwrap();
        let streamed = sim.simulate_sampled(&cfg, &[1e-2, 5e-2], 1.0).unwrap();
        for rec in &streamed {
            let d = crate::sim::decimate(&fine, rec.h, 1.0).unwrap();
            assert_eq!(&d, rec);
        }
    }

    #[test]
    fn rejects_ragged_channels() {
        let k = StateSpace::static_gain(nalgebra::DMatrix::zeros(1, 1));
        let mut cfg = step_cfg();
        cfg.noise_w.clear();
        assert!(matches!(simulate_closed_loop(&lag(), &k, &cfg), Err(Error::Dimension(_))));
        let mut cfg = step_cfg();
        cfg.t_end = 5.0005;
        assert!(simulate_closed_loop(&lag(), &k, &cfg).is_err());
    }
}
