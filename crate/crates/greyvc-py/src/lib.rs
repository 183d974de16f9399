//! Python bindings: quantize a secret, deal shares with any of the four
//! schemes, reconstruct from a chosen coalition, and run the verification
//! battery, all from Python.
//!
//! Build as a cdylib and import the resulting library as `greyvc_py`.

use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use greyvc::error::Error;
use greyvc::pipeline::{self, EncodedShares};
use greyvc::schemes::{self, SchemeSpec};
use greyvc::verify;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Parameter(_) | Error::Precondition { .. } => PyValueError::new_err(e.to_string()),
        Error::Io(_) => PyIOError::new_err(e.to_string()),
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

/// Quantized secret image holding per-pixel grey-level indices below `g`
/// (0 = white, g-1 = fully black).
#[pyclass(name = "GreyImage", frozen)]
struct PyGreyImage {
    inner: pipeline::GreyImage,
}

#[pymethods]
impl PyGreyImage {
    /// Builds an image from already-quantized level indices, row-major.
    #[new]
    fn new(width: usize, height: usize, g: usize, levels: Vec<u8>) -> PyResult<Self> {
        Ok(PyGreyImage { inner: pipeline::GreyImage::new(width, height, g, levels).map_err(py_err)? })
    }

    #[getter]
    fn width(&self) -> usize {
        self.inner.width()
    }

    #[getter]
    fn height(&self) -> usize {
        self.inner.height()
    }

    #[getter]
    fn g(&self) -> usize {
        self.inner.g()
    }

    /// Row-major grey-level indices.
    fn levels(&self) -> Vec<usize> {
        self.inner.levels().iter().map(|&q| q as usize).collect()
    }

    /// 8-bit ink-density rendering (level q -> floor(q*255/(g-1))).
    fn render(&self) -> Vec<u8> {
        self.inner.render()
    }

    fn __repr__(&self) -> String {
        format!(
            "GreyImage(width={}, height={}, g={})",
            self.inner.width(),
            self.inner.height(),
            self.inner.g()
        )
    }
}

/// Quantizes an 8-bit ink-density raster (0 = white, 255 = black) into g
/// grey levels.
#[pyfunction]
fn quantize(width: usize, height: usize, values: Vec<u8>, g: usize) -> PyResult<PyGreyImage> {
    Ok(PyGreyImage { inner: pipeline::quantize(width, height, &values, g).map_err(py_err)? })
}

/// A validated scheme: `baseline` (stacking only), `A`, `B`, or `C`, with
/// its default basis pair for the given (k, n).
#[pyclass(name = "Scheme", frozen)]
struct PyScheme {
    spec: SchemeSpec,
}

#[pymethods]
impl PyScheme {
    #[new]
    #[pyo3(signature = (scheme, k, n, g, seed = 0))]
    fn new(scheme: &str, k: usize, n: usize, g: usize, seed: u64) -> PyResult<Self> {
        let kind: schemes::SchemeKind = scheme.parse().map_err(py_err)?;
        let base = schemes::default_base(kind, k, n).map_err(py_err)?;
        Ok(PyScheme { spec: SchemeSpec::new(kind, k, n, g, seed, base).map_err(py_err)? })
    }

    #[getter]
    fn scheme(&self) -> String {
        self.spec.kind().to_string()
    }

    #[getter]
    fn k(&self) -> usize {
        self.spec.k()
    }

    #[getter]
    fn n(&self) -> usize {
        self.spec.n()
    }

    #[getter]
    fn g(&self) -> usize {
        self.spec.g()
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.spec.seed()
    }

    /// Content runs dealt per participant (the auxiliary share is extra).
    #[getter]
    fn runs(&self) -> usize {
        self.spec.runs()
    }

    #[getter]
    fn has_aux(&self) -> bool {
        self.spec.has_aux()
    }

    /// Subpixels per secret pixel in every share.
    #[getter]
    fn pixel_expansion(&self) -> usize {
        self.spec.block_len()
    }

    /// Deals every pixel of the secret into share transparencies.
    fn encode(&self, image: &PyGreyImage) -> PyResult<PySharedSecret> {
        let encoded = pipeline::encode_image(&image.inner, &self.spec).map_err(py_err)?;
        Ok(PySharedSecret { encoded })
    }

    fn __repr__(&self) -> String {
        format!(
            "Scheme('{}', k={}, n={}, g={}, seed={})",
            self.spec.kind(),
            self.spec.k(),
            self.spec.n(),
            self.spec.g(),
            self.spec.seed()
        )
    }
}

/// Shares plus manifest produced by one encode.
#[pyclass(name = "SharedSecret", frozen)]
struct PySharedSecret {
    encoded: EncodedShares,
}

#[pymethods]
impl PySharedSecret {
    /// Conventional share file names, in manifest order.
    fn file_names(&self) -> Vec<String> {
        self.encoded.shares.iter().map(|s| s.file_name()).collect()
    }

    /// The manifest as pretty-printed JSON.
    fn manifest_json(&self) -> String {
        self.encoded.manifest.to_json()
    }

    /// One transparency's raster as (width, height, bits); `run=None`
    /// fetches the participant's auxiliary share.
    #[pyo3(signature = (participant, run = None))]
    fn share_bits(&self, participant: usize, run: Option<usize>) -> PyResult<(usize, usize, Vec<u8>)> {
        self.encoded
            .shares
            .iter()
            .find(|s| s.participant == participant && s.run == run)
            .map(|s| (s.width, s.height, s.bits.clone()))
            .ok_or_else(|| {
                PyValueError::new_err(format!(
                    "no share for participant {participant}, run {run:?}"
                ))
            })
    }

    /// Reconstructs the secret from the chosen 1-based participants
    /// (default: the lowest-labelled qualified coalition).
    #[pyo3(signature = (members = None))]
    fn decode(&self, members: Option<Vec<usize>>) -> PyResult<PyGreyImage> {
        let recon =
            pipeline::decode_image(&self.encoded.shares, &self.encoded.manifest, members.as_deref())
                .map_err(py_err)?;
        Ok(PyGreyImage { inner: recon.image })
    }

    /// Measured adjacent-level contrasts of a reconstruction, as exact
    /// rationals: a list of (lower, upper, numerator, denominator).
    #[pyo3(signature = (members = None))]
    fn contrasts(&self, members: Option<Vec<usize>>) -> PyResult<Vec<(usize, usize, i64, i64)>> {
        let spec = self.encoded.manifest.scheme_spec().map_err(py_err)?;
        let recon =
            pipeline::decode_image(&self.encoded.shares, &self.encoded.manifest, members.as_deref())
                .map_err(py_err)?;
        let report = pipeline::measure_contrast(&recon, &spec).map_err(py_err)?;
        Ok(report
            .pairs
            .iter()
            .map(|p| (p.lower, p.upper, *p.alpha.numer(), *p.alpha.denom()))
            .collect())
    }

    fn __repr__(&self) -> String {
        format!(
            "SharedSecret(scheme='{}', files={})",
            self.encoded.manifest.scheme,
            self.encoded.shares.len()
        )
    }
}

/// Runs the whole verification battery (golden fixtures, exhaustive
/// security enumeration, failure demonstrations) and returns
/// (passed, text_report).
#[pyfunction]
fn run_verification() -> PyResult<(bool, String)> {
    let report = verify::run_full_verification().map_err(py_err)?;
    Ok((report.passed(), report.to_text()))
}

/// The measured-versus-stated scheme comparison at one parameter point,
/// rendered as text or JSON.
#[pyfunction]
#[pyo3(signature = (k, n, g, json = false))]
fn comparison_report(k: usize, n: usize, g: usize, json: bool) -> PyResult<String> {
    let report = verify::comparison_report(k, n, g).map_err(py_err)?;
    if json {
        report.to_json().map_err(py_err)
    } else {
        Ok(report.to_text())
    }
}

#[pymodule]
fn greyvc_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGreyImage>()?;
    m.add_class::<PyScheme>()?;
    m.add_class::<PySharedSecret>()?;
    m.add_function(wrap_pyfunction!(quantize, m)?)?;
    m.add_function(wrap_pyfunction!(run_verification, m)?)?;
    m.add_function(wrap_pyfunction!(comparison_report, m)?)?;
    Ok(())
}
