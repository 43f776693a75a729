//! Gradient kernels: the classical 3x3 Sobel pair, its zero-dilated
//! extensions, and a registry of 5x5 comparison kernels loaded from a
//! plain-text data file.
//!
//! The extended construction spreads the nine 3x3 Sobel coefficients to
//! rows/columns `{0, (n-1)/2, n-1}` of an n x n matrix and fills every other
//! position with zero, so a size-n kernel senses pixels `(n-1)/2` apart.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::sync::OnceLock;

use crate::error::{Error, Result};

pub const EXTENDED_SIZES: [usize; 7] = [3, 5, 7, 9, 11, 13, 15];

/// Gradient axis a kernel responds to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Axis {
    X,
    Y,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Axis::X => write!(f, "x"),
            Axis::Y => write!(f, "y"),
        }
    }
}

/// A square, odd-sized gradient kernel.
///
/// Invariants enforced at construction: odd size, zero coefficient sum, and
/// mirror antisymmetry (horizontal mirror for x kernels, vertical for y).
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    name: String,
    axis: Axis,
    size: usize,
    coeffs: Vec<f64>,
}

impl Kernel {
    pub fn new(name: impl Into<String>, axis: Axis, size: usize, coeffs: Vec<f64>) -> Result<Self> {
        let name = name.into();
        if size < 3 || size.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "kernel {name:?}: size must be odd and >= 3, got {size}"
            )));
        }
        if coeffs.len() != size * size {
            return Err(Error::Dimension(format!(
                "kernel {name:?}: {} coefficients for size {size}",
                coeffs.len()
            )));
        }
        let sum: f64 = coeffs.iter().sum();
        if sum.abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "kernel {name:?}: coefficient sum {sum} is not zero"
            )));
        }
        let k = Kernel {
            name,
            axis,
            size,
            coeffs,
        };
        for r in 0..size {
            for c in 0..size {
                let mirrored = match axis {
                    Axis::X => k.at(r, size - 1 - c),
                    Axis::Y => k.at(size - 1 - r, c),
                };
                if (k.at(r, c) + mirrored).abs() > 1e-9 {
                    return Err(Error::InvalidArgument(format!(
                        "kernel {:?}: not antisymmetric under {} mirror at ({r},{c})",
                        k.name, k.axis
                    )));
                }
            }
        }
        Ok(k)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn axis(&self) -> Axis {
        self.axis
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    #[inline]
    pub fn at(&self, row: usize, col: usize) -> f64 {
        self.coeffs[row * self.size + col]
    }

    /// Taps with nonzero coefficients as `(row, col, weight)`, row-major
    /// order. Convolution skips zeros via this list.
    pub fn nonzero_taps(&self) -> Vec<(usize, usize, f64)> {
        let mut taps = Vec::new();
        for r in 0..self.size {
            for c in 0..self.size {
                let w = self.at(r, c);
                if w != 0.0 {
                    taps.push((r, c, w));
                }
            }
        }
        taps
    }
}

/// The classical 3x3 Sobel kernel for the given axis.
pub fn sobel_3x3(axis: Axis) -> Kernel {
    extended_sobel(3, axis).expect("size 3 is valid")
}

/// Zero-dilated extended Sobel kernel of the given odd size in `3..=15`.
///
/// The 3x3 entry at `(r, c)` lands at `(r*d, c*d)` with `d = (size-1)/2`;
/// everything else is zero. Size 3 reproduces the classical kernel.
pub fn extended_sobel(size: usize, axis: Axis) -> Result<Kernel> {
    if !EXTENDED_SIZES.contains(&size) {
        return Err(Error::InvalidArgument(format!(
            "extended Sobel size must be odd in 3..=15, got {size}"
        )));
    }
    let base_x = [[1.0, 0.0, -1.0], [2.0, 0.0, -2.0], [1.0, 0.0, -1.0]];
    let base_y = [[1.0, 2.0, 1.0], [0.0, 0.0, 0.0], [-1.0, -2.0, -1.0]];
    let base = match axis {
        Axis::X => base_x,
        Axis::Y => base_y,
    };
    let d = (size - 1) / 2;
    let mut coeffs = vec![0.0; size * size];
    for r in 0..3 {
        for c in 0..3 {
            coeffs[(r * d) * size + c * d] = base[r][c];
        }
    }
    Kernel::new(format!("extended_sobel_{size}x{size}"), axis, size, coeffs)
}

/// Families of 5x5 comparison kernels shipped in the registry file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum ComparisonFamily {
    Sobel5Gupta,
    Prewitt5,
    ModPrewitt5,
    Scharr5,
}

impl ComparisonFamily {
    pub const ALL: [ComparisonFamily; 4] = [
        ComparisonFamily::Sobel5Gupta,
        ComparisonFamily::Prewitt5,
        ComparisonFamily::ModPrewitt5,
        ComparisonFamily::Scharr5,
    ];

    pub fn registry_name(&self) -> &'static str {
        match self {
            ComparisonFamily::Sobel5Gupta => "sobel5_gupta",
            ComparisonFamily::Prewitt5 => "prewitt5",
            ComparisonFamily::ModPrewitt5 => "mod_prewitt5",
            ComparisonFamily::Scharr5 => "scharr5",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        ComparisonFamily::ALL
            .into_iter()
            .find(|f| f.registry_name() == s)
            .ok_or_else(|| Error::Registry(format!("unknown kernel family {s:?}")))
    }
}

impl fmt::Display for ComparisonFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.registry_name())
    }
}

/// A named collection of kernels parsed from the registry file format.
#[derive(Debug, Clone)]
pub struct Registry {
    kernels: HashMap<(String, Axis), Kernel>,
}

const BUILTIN_REGISTRY: &str = include_str!("../data/comparison_kernels.txt");

impl Registry {
    /// The registry bundled with the crate. Parsed once on first use.
    pub fn builtin() -> &'static Registry {
        static REG: OnceLock<Registry> = OnceLock::new();
        REG.get_or_init(|| {
            Registry::parse(BUILTIN_REGISTRY).expect("bundled registry file is valid")
        })
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Registry> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(format!("reading registry {}", path.display()), e))?;
        Registry::parse(&text)
    }

    /// Parse the registry format: `name axis size` header lines, each
    /// followed by `size` rows of coefficients. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Registry> {
        let mut lines = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty());
        let mut kernels = HashMap::new();
        while let Some(header) = lines.next() {
            let parts: Vec<&str> = header.split_ascii_whitespace().collect();
            let [name, axis, size] = parts[..] else {
                return Err(Error::Registry(format!(
                    "bad header line {header:?}, expected `name axis size`"
                )));
            };
            let axis = match axis {
                "x" => Axis::X,
                "y" => Axis::Y,
                other => return Err(Error::Registry(format!("bad axis {other:?}"))),
            };
            let size: usize = size
                .parse()
                .map_err(|_| Error::Registry(format!("bad size in header {header:?}")))?;
            let mut coeffs = Vec::with_capacity(size * size);
            for _ in 0..size {
                let row = lines
                    .next()
                    .ok_or_else(|| Error::Registry(format!("truncated kernel {name:?}")))?;
                let values: Vec<f64> = row
                    .split_ascii_whitespace()
                    .map(|tok| {
                        tok.parse()
                            .map_err(|_| Error::Registry(format!("bad coefficient {tok:?}")))
                    })
                    .collect::<Result<_>>()?;
                if values.len() != size {
                    return Err(Error::Registry(format!(
                        "kernel {name:?}: row has {} values, expected {size}",
                        values.len()
                    )));
                }
                coeffs.extend(values);
            }
            let kernel = Kernel::new(name, axis, size, coeffs)
                .map_err(|e| Error::Registry(e.to_string()))?;
            kernels.insert((name.to_string(), axis), kernel);
        }
        Ok(Registry { kernels })
    }

    pub fn get(&self, name: &str, axis: Axis) -> Result<&Kernel> {
        self.kernels
            .get(&(name.to_string(), axis))
            .ok_or_else(|| Error::Registry(format!("no kernel {name:?} for axis {axis}")))
    }

    pub fn kernels(&self) -> impl Iterator<Item = &Kernel> {
        self.kernels.values()
    }
}

/// Look up a comparison kernel in the bundled registry.
pub fn comparison_kernel(family: ComparisonFamily, axis: Axis) -> Result<Kernel> {
    Registry::builtin()
        .get(family.registry_name(), axis)
        .cloned()
}

/// A kernel selection as it appears on the CLI and in reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum KernelChoice {
    /// Zero-dilated extended Sobel of the given size (3 = classical).
    Extended(usize),
    Comparison(ComparisonFamily),
}

impl KernelChoice {
    pub fn kernel(&self, axis: Axis) -> Result<Kernel> {
        match self {
            KernelChoice::Extended(size) => extended_sobel(*size, axis),
            KernelChoice::Comparison(family) => comparison_kernel(*family, axis),
        }
    }

    pub fn pair(&self) -> Result<(Kernel, Kernel)> {
        Ok((self.kernel(Axis::X)?, self.kernel(Axis::Y)?))
    }

    pub fn label(&self) -> String {
        match self {
            KernelChoice::Extended(size) => format!("{size}x{size}"),
            KernelChoice::Comparison(family) => family.registry_name().to_string(),
        }
    }
}

impl fmt::Display for KernelChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Pretty-print a kernel as `size` rows of aligned coefficients. Integers
/// print without a decimal point; the output parses back via
/// [`parse_matrix`].
pub fn kernel_dump(kernel: &Kernel) -> String {
    let cells: Vec<String> = kernel
        .coeffs()
        .iter()
        .map(|&v| {
            if v == v.trunc() {
                format!("{}", v as i64)
            } else {
                format!("{v}")
            }
        })
        .collect();
    let width = cells.iter().map(|c| c.len()).max().unwrap_or(1);
    let mut out = String::new();
    for r in 0..kernel.size() {
        let row: Vec<String> = (0..kernel.size())
            .map(|c| format!("{:>width$}", cells[r * kernel.size() + c]))
            .collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

/// Parse whitespace-separated rows of numbers back into a coefficient
/// matrix. Inverse of [`kernel_dump`].
pub fn parse_matrix(text: &str) -> Result<Vec<Vec<f64>>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            l.split_ascii_whitespace()
                .map(|tok| {
                    tok.parse()
                        .map_err(|_| Error::InvalidArgument(format!("bad number {tok:?}")))
                })
                .collect()
        })
        .collect()
}
