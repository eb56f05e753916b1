//! Process-wide cache of circulant spectra keyed by `(alpha, n_steps)`.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use pickands_core::fgn::circulant_spectrum;
use pickands_core::{CirculantSpectrum, Result};

type Key = (u64, usize);

fn store() -> &'static RwLock<HashMap<Key, Arc<CirculantSpectrum>>> {
    static CACHE: OnceLock<RwLock<HashMap<Key, Arc<CirculantSpectrum>>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// Returns the spectrum for `(alpha, n_steps)`, building it on first use.
pub fn spectrum(alpha: f64, n_steps: usize) -> Result<Arc<CirculantSpectrum>> {
    let key = (alpha.to_bits(), n_steps);
    if let Some(s) = store().read().expect("spectrum cache poisoned").get(&key) {
        return Ok(Arc::clone(s));
    }
    let built = Arc::new(circulant_spectrum(alpha, n_steps)?);
    let mut map = store().write().expect("spectrum cache poisoned");
    Ok(Arc::clone(map.entry(key).or_insert(built)))
}

/// Drops every cached spectrum.
pub fn clear() {
    store().write().expect("spectrum cache poisoned").clear();
}
