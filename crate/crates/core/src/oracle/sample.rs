use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, StandardNormal};

use super::linalg::{c, identity, kron_all, op_norm, CMatrix};
use super::model::{FiniteModel, Operator, PartyMeasurement, SourceState, MAX_DENSE_DIM};
use crate::error::{Error, Result};
use crate::scenario::{Distribution, NetworkScenario};

/// Largest operator norm of Σ_{a<M} E_a in sampled POVMs.
const POVM_HEADROOM: f64 = 0.9;

fn ginibre(rng: &mut ChaCha8Rng, d: usize) -> CMatrix {
    CMatrix::from_fn(d, d, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        c(re, im)
    })
}

/// Random positive matrix of operator norm 1.
fn random_psd(rng: &mut ChaCha8Rng, d: usize) -> CMatrix {
    let g = ginibre(rng, d);
    let p = &g * g.adjoint();
    let n = op_norm(&p);
    p / c(n, 0.0)
}

fn random_state(rng: &mut ChaCha8Rng, d: usize) -> CMatrix {
    let g = ginibre(rng, d);
    let p = &g * g.adjoint();
    let t = p.trace();
    let mut s = p / t;
    s = (&s + s.adjoint()) * c(0.5, 0.0);
    s
}

fn check_network(net: &NetworkScenario, endpoint_dim: usize) -> Result<()> {
    if endpoint_dim < 1 {
        return Err(Error::InvalidParameter("endpoint dimension must be >= 1".into()));
    }
    let endpoints: usize = net.parties.iter().map(|p| p.slots.len()).sum();
    let total = (endpoint_dim as f64).powi(endpoints as i32);
    if total > MAX_DENSE_DIM as f64 {
        return Err(Error::Dimension(format!(
            "sampled model would have dimension {total} > {MAX_DENSE_DIM}"
        )));
    }
    Ok(())
}

fn sample_sources(net: &NetworkScenario, endpoint_dim: usize, rng: &mut ChaCha8Rng) -> Vec<SourceState> {
    (0..net.sources.len())
        .map(|s| {
            let endpoints: Vec<usize> = (0..net.parties.len())
                .filter(|&p| net.parties[p].slots.iter().any(|sl| sl.sources[0] == s))
                .collect();
            let dims = vec![endpoint_dim; endpoints.len()];
            let d: usize = dims.iter().product();
            SourceState {
                endpoints,
                dims,
                state: Operator(random_state(rng, d)),
            }
        })
        .collect()
}

/// Random model whose POVM elements are sums of ≤ r products of local
/// positive factors, so it is feasible for rank r and its recorded C.
/// Returns the model and the distribution it induces (uniform settings).
pub fn sample_model(
    net: &NetworkScenario,
    endpoint_dim: usize,
    r: usize,
    seed: u64,
) -> Result<(FiniteModel, Distribution)> {
    if r < 1 {
        return Err(Error::InvalidParameter("r must be >= 1".into()));
    }
    check_network(net, endpoint_dim)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sources = sample_sources(net, endpoint_dim, &mut rng);
    let mut c_bound: f64 = 0.0;
    let mut measurements = Vec::with_capacity(net.parties.len());
    for (p, party) in net.parties.iter().enumerate() {
        let slots = party.slots.len();
        let r_eff = if slots > 1 { r } else { 1 };
        let d = endpoint_dim.pow(slots as u32);
        let mut povm = Vec::new();
        let mut factors = Vec::new();
        for _ in 0..net.setting_count(p) {
            let mut f: Vec<Vec<Vec<CMatrix>>> = (0..party.outcomes - 1)
                .map(|_| {
                    (0..r_eff)
                        .map(|_| (0..slots).map(|_| random_psd(&mut rng, endpoint_dim)).collect())
                        .collect()
                })
                .collect();
            let elements = |f: &Vec<Vec<Vec<CMatrix>>>| -> Vec<CMatrix> {
                f.iter()
                    .map(|terms| {
                        terms
                            .iter()
                            .fold(CMatrix::zeros(d, d), |acc, t| acc + kron_all(t))
                    })
                    .collect()
            };
            let sum = elements(&f)
                .into_iter()
                .fold(CMatrix::zeros(d, d), |acc, e| acc + e);
            let scale = POVM_HEADROOM / op_norm(&sum);
            let per_factor = scale.powf(1.0 / slots as f64);
            for terms in &mut f {
                for t in terms.iter_mut() {
                    for m in t.iter_mut() {
                        *m *= c(per_factor, 0.0);
                        c_bound = c_bound.max(op_norm(m));
                    }
                }
            }
            let mut elems = elements(&f);
            let rest = elems
                .iter()
                .fold(identity(d), |acc, e| acc - e);
            elems.push(rest);
            for e in &mut elems {
                *e = (&*e + e.adjoint()) * c(0.5, 0.0);
            }
            povm.push(elems.into_iter().map(Operator).collect());
            factors.push(
                f.into_iter()
                    .map(|terms| {
                        terms
                            .into_iter()
                            .map(|t| t.into_iter().map(Operator).collect())
                            .collect()
                    })
                    .collect(),
            );
        }
        measurements.push(PartyMeasurement {
            povm,
            factors: Some(factors),
        });
    }
    let model = FiniteModel {
        network: net.clone(),
        r,
        c_bound,
        seed: Some(seed),
        sources,
        measurements,
    };
    model.validate()?;
    let dist = model.distribution()?;
    Ok((model, dist))
}

/// Random model with unstructured POVMs (E_a = S^{-1/2} W_a S^{-1/2} for
/// random positive W_a), used as input to Schmidt truncation.
pub fn sample_general_model(net: &NetworkScenario, endpoint_dim: usize, seed: u64) -> Result<FiniteModel> {
    check_network(net, endpoint_dim)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sources = sample_sources(net, endpoint_dim, &mut rng);
    let mut measurements = Vec::new();
    for (p, party) in net.parties.iter().enumerate() {
        let d = endpoint_dim.pow(party.slots.len() as u32);
        let mut povm = Vec::new();
        for _ in 0..net.setting_count(p) {
            let w: Vec<CMatrix> = (0..party.outcomes).map(|_| random_psd(&mut rng, d)).collect();
            let s = w.iter().fold(CMatrix::zeros(d, d), |acc, x| acc + x);
            let eig = nalgebra::SymmetricEigen::new(s);
            let inv_sqrt = &eig.eigenvectors
                * CMatrix::from_diagonal(&eig.eigenvalues.map(|v| c(1.0 / v.sqrt(), 0.0)))
                * eig.eigenvectors.adjoint();
            povm.push(
                w.iter()
                    .map(|x| {
                        let e = &inv_sqrt * x * &inv_sqrt;
                        Operator((&e + e.adjoint()) * c(0.5, 0.0))
                    })
                    .collect(),
            );
        }
        measurements.push(PartyMeasurement { povm, factors: None });
    }
    let model = FiniteModel {
        network: net.clone(),
        r: 1,
        c_bound: 1.0,
        seed: Some(seed),
        sources,
        measurements,
    };
    model.validate()?;
    Ok(model)
}
