//! Python bindings: chains, the statistical checks and the exact oracle.
//! Reports come back as plain dicts with the same fields as the CLI JSON.

use adaptive_smc::monitor::DEFAULT_CHECK_BOUND;
use adaptive_smc::reach::goal_mask;
use adaptive_smc::runner::DEFAULT_MAX_STEPS;
use adaptive_smc::{exact, generators, io};
use adaptive_smc::{HypothesisSpec, MarkovChain, RunConfig, SampleCount, SmcError, VerificationReport};
use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

create_exception!(adaptive_smc_py, DivergedError, PyRuntimeError, "A sampled path exceeded max_steps.");

fn py_err(e: SmcError) -> PyErr {
    match e {
        SmcError::Diverged { .. } => DivergedError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn to_dict(py: Python<'_>, report: &VerificationReport) -> PyResult<PyObject> {
    let text = serde_json::to_string(report).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    Ok(py.import_bound("json")?.call_method1("loads", (text,))?.unbind())
}

/// A finite discrete-time Markov chain with labels and rewards.
#[pyclass(frozen)]
struct Chain {
    inner: MarkovChain,
}

#[pymethods]
impl Chain {
    /// Parses the contents of .tra/.lab and optional .rew/.init files.
    #[staticmethod]
    #[pyo3(signature = (tra, lab, rew=None, init=None))]
    fn from_text(tra: &str, lab: &str, rew: Option<&str>, init: Option<&str>) -> PyResult<Self> {
        let inner = io::parse_chain(tra, lab, rew, init).map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(Chain { inner })
    }

    #[staticmethod]
    #[pyo3(signature = (tra, lab, rew=None, init=None))]
    fn from_files(tra: &str, lab: &str, rew: Option<&str>, init: Option<&str>) -> PyResult<Self> {
        let read = |p: &str| std::fs::read_to_string(p).map_err(|e| PyValueError::new_err(format!("{p}: {e}")));
        let rew = rew.map(read).transpose()?;
        let init = init.map(read).transpose()?;
        Self::from_text(&read(tra)?, &read(lab)?, rew.as_deref(), init.as_deref())
    }

    /// Built-in family such as "fig1:3", "fig4:10,2" or "random:8,3,1".
    #[staticmethod]
    fn generate(spec: &str) -> PyResult<Self> {
        Ok(Chain {
            inner: generators::from_spec(spec).map_err(py_err)?,
        })
    }

    #[getter]
    fn n_states(&self) -> usize {
        self.inner.n_states()
    }

    #[getter]
    fn n_transitions(&self) -> usize {
        self.inner.n_transitions()
    }

    #[getter]
    fn labels(&self) -> Vec<String> {
        self.inner.label_names().to_vec()
    }

    #[getter]
    fn actual_pmin(&self) -> f64 {
        self.inner.actual_pmin()
    }

    /// (tra, lab, rew, init) file contents.
    fn to_text(&self) -> (String, String, String, String) {
        let c = &self.inner;
        (io::to_tra(c), io::to_lab(c), io::to_rew(c), io::to_init(c))
    }

    fn __repr__(&self) -> String {
        format!("Chain(n_states={}, n_transitions={})", self.inner.n_states(), self.inner.n_transitions())
    }
}

/// Declared pmin plus run configuration, refusing overestimates.
fn prepare(chain: &Chain, pmin: Option<f64>, seed: u64, threads: usize, check_bound: u64, max_steps: u64) -> PyResult<(MarkovChain, f64, RunConfig)> {
    let c = chain.inner.clone();
    let (c, p) = match pmin {
        None => {
            let p = c.actual_pmin();
            (c, p)
        }
        Some(p) => (c.with_declared_pmin(p).map_err(|e| PyValueError::new_err(e.to_string()))?, p),
    };
    if threads == 0 || check_bound == 0 || max_steps == 0 {
        return Err(PyValueError::new_err("threads, check_bound and max_steps must be positive"));
    }
    let cfg = RunConfig {
        master_seed: seed,
        threads,
        check_bound,
        max_steps,
    };
    Ok((c, p, cfg))
}

#[pyfunction]
#[pyo3(signature = (chain, goal, p, epsilon, alpha=0.01, beta=0.01, delta=None, pmin=None, seed=0, threads=1, check_bound=DEFAULT_CHECK_BOUND, max_steps=DEFAULT_MAX_STEPS))]
#[allow(clippy::too_many_arguments)]
fn check_reach(
    py: Python<'_>,
    chain: &Chain,
    goal: &str,
    p: f64,
    epsilon: f64,
    alpha: f64,
    beta: f64,
    delta: Option<f64>,
    pmin: Option<f64>,
    seed: u64,
    threads: usize,
    check_bound: u64,
    max_steps: u64,
) -> PyResult<PyObject> {
    let (c, pmin, cfg) = prepare(chain, pmin, seed, threads, check_bound, max_steps)?;
    let spec = HypothesisSpec::new(p, epsilon, alpha, beta, delta.unwrap_or(epsilon / 2.0)).map_err(py_err)?;
    let g = goal_mask(&c, goal).map_err(py_err)?;
    let report = py.allow_threads(|| adaptive_smc::verify_reach(&c, &g, &spec, pmin, &cfg)).map_err(py_err)?;
    to_dict(py, &report)
}

/// `hoa` is the automaton text in the HOA format.
#[pyfunction]
#[pyo3(signature = (chain, hoa, p, epsilon, alpha=0.01, beta=0.01, delta=None, pmin=None, seed=0, threads=1, check_bound=DEFAULT_CHECK_BOUND, max_steps=DEFAULT_MAX_STEPS))]
#[allow(clippy::too_many_arguments)]
fn check_ltl(
    py: Python<'_>,
    chain: &Chain,
    hoa: &str,
    p: f64,
    epsilon: f64,
    alpha: f64,
    beta: f64,
    delta: Option<f64>,
    pmin: Option<f64>,
    seed: u64,
    threads: usize,
    check_bound: u64,
    max_steps: u64,
) -> PyResult<PyObject> {
    let (c, pmin, cfg) = prepare(chain, pmin, seed, threads, check_bound, max_steps)?;
    let spec = HypothesisSpec::new(p, epsilon, alpha, beta, delta.unwrap_or(epsilon / 2.0)).map_err(py_err)?;
    let dra = io::parse_hoa(hoa).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let report = py.allow_threads(|| adaptive_smc::verify_ltl(&c, &dra, &spec, pmin, &cfg)).map_err(py_err)?;
    to_dict(py, &report)
}

#[pyfunction]
#[pyo3(signature = (chain, alpha=0.05, mperr=0.08, delta=0.011, n_samples=None, interval_size=0.22, pmin=None, seed=0, threads=1, check_bound=DEFAULT_CHECK_BOUND, max_steps=DEFAULT_MAX_STEPS))]
#[allow(clippy::too_many_arguments)]
fn estimate_mp(
    py: Python<'_>,
    chain: &Chain,
    alpha: f64,
    mperr: f64,
    delta: f64,
    n_samples: Option<u64>,
    interval_size: f64,
    pmin: Option<f64>,
    seed: u64,
    threads: usize,
    check_bound: u64,
    max_steps: u64,
) -> PyResult<PyObject> {
    let (c, pmin, cfg) = prepare(chain, pmin, seed, threads, check_bound, max_steps)?;
    let count = n_samples.map_or(SampleCount::TargetSize(interval_size), SampleCount::Fixed);
    let report = py
        .allow_threads(|| adaptive_smc::estimate_mp(&c, alpha, mperr, delta, pmin, count, &cfg))
        .map_err(py_err)?;
    to_dict(py, &report)
}

#[pyfunction]
#[pyo3(signature = (chain, goal, p_term, n_samples=1000, seed=0, threads=1, max_steps=DEFAULT_MAX_STEPS))]
fn baseline(py: Python<'_>, chain: &Chain, goal: &str, p_term: f64, n_samples: u64, seed: u64, threads: usize, max_steps: u64) -> PyResult<PyObject> {
    let (c, _, cfg) = prepare(chain, None, seed, threads, DEFAULT_CHECK_BOUND, max_steps)?;
    let report = py
        .allow_threads(|| exact::baseline_estimate(&c, goal, p_term, n_samples, &cfg))
        .map_err(py_err)?;
    to_dict(py, &report)
}

#[pyfunction]
fn exact_reach(chain: &Chain, goal: &str) -> PyResult<f64> {
    let g = goal_mask(&chain.inner, goal).map_err(py_err)?;
    exact::exact_reachability(&chain.inner, &g).map_err(py_err)
}

#[pyfunction]
fn exact_mp(chain: &Chain) -> PyResult<f64> {
    exact::exact_mp(&chain.inner).map_err(py_err)
}

#[pyfunction]
fn exact_ltl(chain: &Chain, hoa: &str) -> PyResult<f64> {
    let dra = io::parse_hoa(hoa).map_err(|e| PyValueError::new_err(e.to_string()))?;
    exact::exact_ltl(&chain.inner, &dra).map_err(py_err)
}

/// (number of BSCCs, size of the largest).
#[pyfunction]
fn bscc_inventory(chain: &Chain) -> (usize, usize) {
    let inv = exact::bscc_inventory(&chain.inner);
    (inv.count, inv.max_size)
}

#[pymodule]
fn adaptive_smc_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Chain>()?;
    m.add("DivergedError", m.py().get_type_bound::<DivergedError>())?;
    m.add_function(wrap_pyfunction!(check_reach, m)?)?;
    m.add_function(wrap_pyfunction!(check_ltl, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_mp, m)?)?;
    m.add_function(wrap_pyfunction!(baseline, m)?)?;
    m.add_function(wrap_pyfunction!(exact_reach, m)?)?;
    m.add_function(wrap_pyfunction!(exact_mp, m)?)?;
    m.add_function(wrap_pyfunction!(exact_ltl, m)?)?;
    m.add_function(wrap_pyfunction!(bscc_inventory, m)?)?;
    Ok(())
}
