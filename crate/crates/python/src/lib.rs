//! Python bindings. Built as the `emotion_isp` extension module with maturin.

use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

use emotion_isp::inverse::{linearize, InverseConfig};
use emotion_isp::io::{self, ImageFile};
use emotion_isp::ops::{clahe, filters, tint, tone};
use emotion_isp::stats::{
    ab_tally, calibrate_presets, read_ab_records, read_calibration_records, rm_anova, Aggregator,
    MissingCells,
};
use emotion_isp::{
    preset_for_emotion, quadrant_from_va, render as render_image, ControlVector, Emotion,
    LinearImage, OutputEncoding, Parameter, PipelineConfig, Plane, VAVector,
};
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn py_err(e: emotion_isp::Error) -> PyErr {
    match e {
        emotion_isp::Error::Io(inner) => PyIOError::new_err(inner.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn json_to_py(py: Python<'_>, value: serde_json::Value) -> PyResult<Bound<'_, PyAny>> {
    let text = value.to_string();
    py.import("json")?.call_method1("loads", (text,))
}

/// Six control parameters in S, YB, RG, LC, B, P order.
#[pyclass(name = "ControlVector", module = "emotion_isp", skip_from_py_object)]
#[derive(Clone)]
struct PyControlVector {
    inner: ControlVector,
}

#[pymethods]
impl PyControlVector {
    #[new]
    #[pyo3(signature = (saturation=0.0, yellow_blue=0.0, red_green=0.0, local_contrast=0.0, brightness=0.0, sharpening=0.0))]
    fn new(
        saturation: f64,
        yellow_blue: f64,
        red_green: f64,
        local_contrast: f64,
        brightness: f64,
        sharpening: f64,
    ) -> PyResult<Self> {
        let inner = ControlVector::from_array([
            saturation,
            yellow_blue,
            red_green,
            local_contrast,
            brightness,
            sharpening,
        ])
        .map_err(py_err)?;
        Ok(Self { inner })
    }

    /// Parses `"S,YB,RG,LC,B,P"`.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: ControlVector::parse_list(text).map_err(py_err)?,
        })
    }

    #[staticmethod]
    fn preset(emotion: &str) -> PyResult<Self> {
        Ok(Self {
            inner: preset_for_emotion(parse_emotion(emotion)?),
        })
    }

    fn to_list(&self) -> Vec<f64> {
        self.inner.to_array().to_vec()
    }

    fn __repr__(&self) -> String {
        format!("ControlVector({})", self.inner.to_list())
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }
}

fn parse_emotion(name: &str) -> PyResult<Emotion> {
    name.parse().map_err(py_err)
}

/// Accepts a `ControlVector`, an emotion name or a sequence of six floats.
fn vector_arg(obj: &Bound<'_, PyAny>) -> PyResult<ControlVector> {
    if let Ok(v) = obj.extract::<PyRef<PyControlVector>>() {
        return Ok(v.inner);
    }
    if let Ok(name) = obj.extract::<String>() {
        return Ok(preset_for_emotion(parse_emotion(&name)?));
    }
    let values: Vec<f64> = obj.extract()?;
    let array: [f64; 6] = values
        .try_into()
        .map_err(|v: Vec<f64>| PyValueError::new_err(format!("expected 6 values, got {}", v.len())))?;
    ControlVector::from_array(array).map_err(py_err)
}

fn config_arg(config: Option<&str>) -> PyResult<PipelineConfig> {
    match config {
        Some(text) => PipelineConfig::parse_kv(text).map_err(py_err),
        None => Ok(PipelineConfig::default()),
    }
}

/// Linear RGB image with values in [0, 1].
#[pyclass(name = "Image", module = "emotion_isp")]
struct PyImage {
    inner: LinearImage,
}

#[pymethods]
impl PyImage {
    /// `pixels` is a sequence of `(r, g, b)` triples in row-major order.
    #[new]
    fn new(width: usize, height: usize, pixels: Vec<[f64; 3]>) -> PyResult<Self> {
        Ok(Self {
            inner: LinearImage::new(width, height, pixels).map_err(py_err)?,
        })
    }

    /// Loads a 16-bit PPM or a PNG (8-bit PNGs are decoded as sRGB).
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        let file = ImageFile::infer(path).map_err(py_err)?;
        Ok(Self {
            inner: io::load_image(&file).map_err(py_err)?,
        })
    }

    /// Linearizes an 8-bit sRGB (or pure gamma) PNG.
    #[staticmethod]
    #[pyo3(signature = (path, gamma=None))]
    fn linearize(path: PathBuf, gamma: Option<f64>) -> PyResult<Self> {
        let cfg = gamma.map(InverseConfig::gamma).unwrap_or_default();
        let src = io::load_srgb8(&path).map_err(py_err)?;
        Ok(Self {
            inner: linearize(&src, &cfg).map_err(py_err)?,
        })
    }

    /// Writes 16-bit linear (`.ppm`/`.png`) or 8-bit sRGB (`.png`).
    #[pyo3(signature = (path, bit_depth=16))]
    fn save(&self, path: PathBuf, bit_depth: u32) -> PyResult<()> {
        let encoding = match bit_depth {
            16 => OutputEncoding::Linear16,
            8 => OutputEncoding::Srgb8,
            other => return Err(PyValueError::new_err(format!("bit depth must be 8 or 16, got {other}"))),
        };
        let file = ImageFile::for_output(path, encoding).map_err(py_err)?;
        io::save_image(&self.inner, &file).map_err(py_err)
    }

    #[getter]
    fn width(&self) -> usize {
        self.inner.width()
    }

    #[getter]
    fn height(&self) -> usize {
        self.inner.height()
    }

    fn pixels(&self) -> Vec<(f64, f64, f64)> {
        self.inner.pixels().iter().map(|p| (p[0], p[1], p[2])).collect()
    }

    fn mean_luma(&self) -> f64 {
        emotion_isp::rgb_to_lumachroma(&self.inner).y.mean()
    }

    fn __repr__(&self) -> String {
        format!("Image({}x{})", self.inner.width(), self.inner.height())
    }
}

/// Renders `image` with a control vector, emotion name or six floats.
/// `config` is key-value pipeline configuration text.
#[pyfunction]
#[pyo3(signature = (image, vector, config=None))]
fn render(py: Python<'_>, image: &PyImage, vector: &Bound<'_, PyAny>, config: Option<&str>) -> PyResult<PyImage> {
    let vector = vector_arg(vector)?;
    let cfg = config_arg(config)?;
    let img = &image.inner;
    let out = py.detach(|| render_image(img, &vector, &cfg)).map_err(py_err)?;
    Ok(PyImage { inner: out })
}

/// Renders a file to a file, as the `render` CLI command does.
#[pyfunction]
#[pyo3(signature = (input, output, vector, bit_depth=16, config=None))]
fn render_file(
    py: Python<'_>,
    input: PathBuf,
    output: PathBuf,
    vector: &Bound<'_, PyAny>,
    bit_depth: u32,
    config: Option<&str>,
) -> PyResult<()> {
    let img = PyImage::load(input)?;
    render(py, &img, vector, config)?.save(output, bit_depth)
}

#[pyfunction]
fn presets(py: Python<'_>) -> PyResult<Bound<'_, PyDict>> {
    let dict = PyDict::new(py);
    for e in Emotion::CALIBRATED {
        dict.set_item(e.name(), preset_for_emotion(e).to_array().to_vec())?;
    }
    Ok(dict)
}

/// Emotion quadrant of a valence/arousal pair; zero on either axis is an error.
#[pyfunction]
fn quadrant(valence: f64, arousal: f64) -> PyResult<&'static str> {
    let va = VAVector::new(valence, arousal).map_err(py_err)?;
    Ok(quadrant_from_va(va).map_err(py_err)?.name())
}

fn plane_arg(data: Vec<f64>, width: usize, height: usize) -> PyResult<Plane> {
    Plane::new(width, height, data).map_err(py_err)
}

#[pyfunction]
fn guided_filter(data: Vec<f64>, width: usize, height: usize, radius: usize, eps: f64) -> PyResult<Vec<f64>> {
    Ok(filters::guided_filter(&plane_arg(data, width, height)?, radius, eps).into_data())
}

#[pyfunction]
#[pyo3(signature = (data, width, height, tiles=(8, 8), clip=2.0))]
fn clahe_plane(data: Vec<f64>, width: usize, height: usize, tiles: (usize, usize), clip: f64) -> PyResult<Vec<f64>> {
    Ok(clahe::clahe(&plane_arg(data, width, height)?, tiles, clip).into_data())
}

/// Per-channel tint multipliers `(red, green, blue)`.
#[pyfunction]
fn tint_coefficients(alpha_rg: f64, alpha_yb: f64) -> (f64, f64, f64) {
    let c = tint::tint_coefficients(alpha_rg, alpha_yb);
    (c.red, c.green, c.blue)
}

#[pyfunction]
fn brightness_exponent(avg_y: f64, alpha_b: f64, target: f64) -> PyResult<f64> {
    tone::brightness_exponent(avg_y, alpha_b, target).map_err(py_err)
}

fn open(path: &PathBuf) -> PyResult<BufReader<File>> {
    Ok(BufReader::new(File::open(path).map_err(|e| {
        PyIOError::new_err(format!("{}: {e}", path.display()))
    })?))
}

/// Repeated-measures ANOVA per parameter plus aggregated presets from a
/// calibration JSON-lines log. Returns `{"anova": [...], "presets": {...}}`.
#[pyfunction]
#[pyo3(signature = (records, aggregator="median", missing="reject"))]
fn analyze<'py>(py: Python<'py>, records: PathBuf, aggregator: &str, missing: &str) -> PyResult<Bound<'py, PyAny>> {
    let aggregator = match aggregator {
        "median" => Aggregator::Median,
        "mean" => Aggregator::Mean,
        other => return Err(PyValueError::new_err(format!("unknown aggregator `{other}`"))),
    };
    let missing = match missing {
        "reject" => MissingCells::Reject,
        "drop" => MissingCells::DropSubject,
        "impute" => MissingCells::ImputeLevelMean,
        other => return Err(PyValueError::new_err(format!("unknown missing-cell policy `{other}`"))),
    };
    let records = read_calibration_records(open(&records)?).map_err(py_err)?;
    let anova = Parameter::ALL
        .into_iter()
        .map(|p| rm_anova(&records, p, missing))
        .collect::<emotion_isp::Result<Vec<_>>>()
        .map_err(py_err)?;
    let presets: serde_json::Map<String, serde_json::Value> = calibrate_presets(&records, aggregator)
        .map_err(py_err)?
        .into_iter()
        .map(|p| (p.emotion.name().to_string(), serde_json::json!(p.vector)))
        .collect();
    json_to_py(py, serde_json::json!({ "anova": anova, "presets": presets }))
}

/// Preference tally of an A/B JSON-lines log: `{"correct": row, "wrong": row}`.
#[pyfunction]
#[pyo3(signature = (records, include_calm=false))]
fn tally<'py>(py: Python<'py>, records: PathBuf, include_calm: bool) -> PyResult<Bound<'py, PyAny>> {
    let records = read_ab_records(open(&records)?, include_calm).map_err(py_err)?;
    json_to_py(py, serde_json::json!(ab_tally(&records).map_err(py_err)?))
}

#[pymodule]
#[pyo3(name = "emotion_isp")]
fn emotion_isp_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyControlVector>()?;
    m.add_class::<PyImage>()?;
    m.add_function(wrap_pyfunction!(render, m)?)?;
    m.add_function(wrap_pyfunction!(render_file, m)?)?;
    m.add_function(wrap_pyfunction!(presets, m)?)?;
    m.add_function(wrap_pyfunction!(quadrant, m)?)?;
    m.add_function(wrap_pyfunction!(guided_filter, m)?)?;
    m.add_function(wrap_pyfunction!(clahe_plane, m)?)?;
    m.add_function(wrap_pyfunction!(tint_coefficients, m)?)?;
    m.add_function(wrap_pyfunction!(brightness_exponent, m)?)?;
    m.add_function(wrap_pyfunction!(analyze, m)?)?;
    m.add_function(wrap_pyfunction!(tally, m)?)?;
    m.add("PARAMETERS", Parameter::ALL.map(|p| p.name()).to_vec())?;
    Ok(())
}
