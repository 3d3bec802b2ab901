//! Thin pyo3 glue over the bls12_381_plus pairing crate.
//!
//! All curve arithmetic is delegated to the crate; this layer only moves
//! bytes across the FFI boundary and keeps group elements opaque to Python.
//! Scalars cross the boundary as 64-byte little-endian strings and are
//! reduced modulo the group order on entry.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyBytes;

use bls12_381_plus::elliptic_curve::hash2curve::ExpandMsgXmd;
use bls12_381_plus::group::{Curve, Group};
use bls12_381_plus::{
    multi_miller_loop, pairing, G1Affine, G1Projective, G2Affine, G2Prepared, G2Projective, Gt,
    Scalar,
};
use sha2::Sha256;

const G1_LEN: usize = 48;
const G2_LEN: usize = 96;
const GT_LEN: usize = 576;
const WIDE_LEN: usize = 64;

/// BLS12-381 subgroup order, big-endian.
const ORDER_BE: [u8; 32] = [
    0x73, 0xed, 0xa7, 0x53, 0x29, 0x9d, 0x7d, 0x48, 0x33, 0x39, 0xd8, 0x08, 0x09, 0xa1, 0xd8,
    0x05, 0x53, 0xbd, 0xa4, 0x02, 0xff, 0xfe, 0x5b, 0xfe, 0xff, 0xff, 0xff, 0xff, 0x00, 0x00,
    0x00, 0x01,
];

fn scalar_from_wide(data: &[u8]) -> PyResult<Scalar> {
    let arr: [u8; WIDE_LEN] = data
        .try_into()
        .map_err(|_| PyValueError::new_err("scalar-length"))?;
    Ok(Scalar::from_bytes_wide(&arr))
}

/// Signed radix-16 digit decomposition of a canonical little-endian scalar.
/// Digits lie in [-8, 8]; position 64 absorbs the final carry.
fn signed_radix16(bytes: &[u8; 32]) -> [i8; 65] {
    let mut digits = [0i8; 65];
    for i in 0..32 {
        digits[2 * i] = (bytes[i] & 15) as i8;
        digits[2 * i + 1] = (bytes[i] >> 4) as i8;
    }
    for i in 0..64 {
        if digits[i] >= 8 {
            digits[i] -= 16;
            digits[i + 1] += 1;
        }
    }
    digits
}

/// Interleaved variable-time multi-scalar multiplication over the digit
/// decompositions: shared doublings, per-point table of 1P..8P.
fn msm_vartime_impl(points: &[G1Projective], digits: &[[i8; 65]]) -> G1Projective {
    let tables: Vec<[G1Projective; 8]> = points
        .iter()
        .map(|p| {
            let mut table = [*p; 8];
            for i in 1..8 {
                table[i] = table[i - 1] + p;
            }
            table
        })
        .collect();
    let mut acc = G1Projective::IDENTITY;
    for pos in (0..65).rev() {
        if !bool::from(acc.is_identity()) {
            acc = acc.double().double().double().double();
        }
        for (table, ds) in tables.iter().zip(digits.iter()) {
            let d = ds[pos];
            if d > 0 {
                acc += table[(d - 1) as usize];
            } else if d < 0 {
                acc -= table[(-d - 1) as usize];
            }
        }
    }
    acc
}

/// q * x == identity iff x lies in the order-q subgroup of the pairing target group.
fn gt_in_subgroup(x: &Gt) -> bool {
    let mut acc = Gt::IDENTITY;
    for byte in ORDER_BE.iter() {
        for shift in (0..8).rev() {
            acc = acc.double();
            if (byte >> shift) & 1 == 1 {
                acc += *x;
            }
        }
    }
    acc.is_identity().into()
}

#[pyclass(frozen, module = "ringauth._pairing_native")]
#[derive(Clone)]
pub struct G1El {
    p: G1Projective,
}

#[pyclass(frozen, module = "ringauth._pairing_native")]
#[derive(Clone)]
pub struct G2El {
    p: G2Projective,
}

#[pyclass(frozen, module = "ringauth._pairing_native")]
#[derive(Clone)]
pub struct GtEl {
    v: Gt,
}

/// Precomputed Miller-loop coefficients for a fixed G2 argument.
#[pyclass(frozen, module = "ringauth._pairing_native")]
pub struct G2Prep {
    prep: G2Prepared,
}

#[pymethods]
impl G1El {
    #[staticmethod]
    fn generator() -> Self {
        G1El {
            p: G1Projective::GENERATOR,
        }
    }

    #[staticmethod]
    fn identity() -> Self {
        G1El {
            p: G1Projective::IDENTITY,
        }
    }

    #[staticmethod]
    fn hash_to_curve(msg: &[u8], dst: &[u8]) -> Self {
        G1El {
            p: G1Projective::hash::<ExpandMsgXmd<Sha256>>(msg, dst),
        }
    }

    #[staticmethod]
    fn from_bytes(data: &[u8]) -> PyResult<Self> {
        let arr: [u8; G1_LEN] = data
            .try_into()
            .map_err(|_| PyValueError::new_err("wrong-length"))?;
        let unchecked = G1Affine::from_compressed_unchecked(&arr);
        if bool::from(unchecked.is_none()) {
            return Err(PyValueError::new_err("invalid-encoding"));
        }
        let aff = unchecked.unwrap();
        if !bool::from(aff.is_torsion_free()) {
            return Err(PyValueError::new_err("off-subgroup"));
        }
        Ok(G1El {
            p: G1Projective::from(aff),
        })
    }

    fn to_bytes<'py>(&self, py: Python<'py>) -> Bound<'py, PyBytes> {
        PyBytes::new(py, &self.p.to_affine().to_compressed())
    }

    fn add(&self, other: &G1El) -> Self {
        G1El { p: self.p + other.p }
    }

    fn neg(&self) -> Self {
        G1El { p: -self.p }
    }

    fn mul(&self, scalar_wide_le: &[u8]) -> PyResult<Self> {
        Ok(G1El {
            p: self.p * scalar_from_wide(scalar_wide_le)?,
        })
    }

    fn mul_u64(&self, k: u64) -> Self {
        G1El {
            p: self.p * Scalar::from(k),
        }
    }

    fn equals(&self, other: &G1El) -> bool {
        self.p == other.p
    }

    fn is_identity(&self) -> bool {
        self.p.is_identity().into()
    }

    /// Constant-time Pippenger multi-exponentiation; scalars are 64-byte
    /// wide little-endian.
    #[staticmethod]
    fn msm(py: Python<'_>, points: Vec<Py<G1El>>, scalars: Vec<Vec<u8>>) -> PyResult<Self> {
        if points.len() != scalars.len() {
            return Err(PyValueError::new_err("msm-length-mismatch"));
        }
        let pts: Vec<G1Projective> = points.iter().map(|p| p.borrow(py).p).collect();
        let ss: Vec<Scalar> = scalars
            .iter()
            .map(|s| scalar_from_wide(s))
            .collect::<PyResult<_>>()?;
        Ok(G1El {
            p: G1Projective::sum_of_products(&pts, &ss),
        })
    }

    /// Variable-time interleaved multi-exponentiation (signed radix-16).
    /// Only for public inputs: verification aggregates, batch weights.
    #[staticmethod]
    fn msm_vartime(py: Python<'_>, points: Vec<Py<G1El>>, scalars: Vec<Vec<u8>>) -> PyResult<Self> {
        if points.len() != scalars.len() {
            return Err(PyValueError::new_err("msm-length-mismatch"));
        }
        let pts: Vec<G1Projective> = points.iter().map(|p| p.borrow(py).p).collect();
        let digits: Vec<[i8; 65]> = scalars
            .iter()
            .map(|s| Ok(signed_radix16(&scalar_from_wide(s)?.to_le_bytes())))
            .collect::<PyResult<_>>()?;
        Ok(G1El {
            p: msm_vartime_impl(&pts, &digits),
        })
    }

    /// Variable-time single multiplication; only for public scalars.
    fn mul_vartime(&self, scalar_wide_le: &[u8]) -> PyResult<Self> {
        let digits = signed_radix16(&scalar_from_wide(scalar_wide_le)?.to_le_bytes());
        Ok(G1El {
            p: msm_vartime_impl(&[self.p], &[digits]),
        })
    }

    #[staticmethod]
    fn sum(py: Python<'_>, points: Vec<Py<G1El>>) -> Self {
        let mut acc = G1Projective::IDENTITY;
        for point in points.iter() {
            acc += point.borrow(py).p;
        }
        G1El { p: acc }
    }
}

#[pymethods]
impl G2El {
    #[staticmethod]
    fn generator() -> Self {
        G2El {
            p: G2Projective::GENERATOR,
        }
    }

    #[staticmethod]
    fn identity() -> Self {
        G2El {
            p: G2Projective::IDENTITY,
        }
    }

    #[staticmethod]
    fn hash_to_curve(msg: &[u8], dst: &[u8]) -> Self {
        G2El {
            p: G2Projective::hash::<ExpandMsgXmd<Sha256>>(msg, dst),
        }
    }

    #[staticmethod]
    fn from_bytes(data: &[u8]) -> PyResult<Self> {
        let arr: [u8; G2_LEN] = data
            .try_into()
            .map_err(|_| PyValueError::new_err("wrong-length"))?;
        let unchecked = G2Affine::from_compressed_unchecked(&arr);
        if bool::from(unchecked.is_none()) {
            return Err(PyValueError::new_err("invalid-encoding"));
        }
        let aff = unchecked.unwrap();
        if !bool::from(aff.is_torsion_free()) {
            return Err(PyValueError::new_err("off-subgroup"));
        }
        Ok(G2El {
            p: G2Projective::from(aff),
        })
    }

    fn to_bytes<'py>(&self, py: Python<'py>) -> Bound<'py, PyBytes> {
        PyBytes::new(py, &self.p.to_affine().to_compressed())
    }

    fn add(&self, other: &G2El) -> Self {
        G2El { p: self.p + other.p }
    }

    fn neg(&self) -> Self {
        G2El { p: -self.p }
    }

    fn mul(&self, scalar_wide_le: &[u8]) -> PyResult<Self> {
        Ok(G2El {
            p: self.p * scalar_from_wide(scalar_wide_le)?,
        })
    }

    fn equals(&self, other: &G2El) -> bool {
        self.p == other.p
    }

    fn is_identity(&self) -> bool {
        self.p.is_identity().into()
    }

    fn prepare(&self) -> G2Prep {
        G2Prep {
            prep: G2Prepared::from(self.p.to_affine()),
        }
    }
}

#[pymethods]
impl GtEl {
    #[staticmethod]
    fn generator() -> Self {
        GtEl {
            v: Gt::generator(),
        }
    }

    #[staticmethod]
    fn identity() -> Self {
        GtEl { v: Gt::IDENTITY }
    }

    #[staticmethod]
    fn from_bytes(data: &[u8]) -> PyResult<Self> {
        let arr: [u8; GT_LEN] = data
            .try_into()
            .map_err(|_| PyValueError::new_err("wrong-length"))?;
        let parsed = Gt::from_bytes(&arr);
        if bool::from(parsed.is_none()) {
            return Err(PyValueError::new_err("invalid-encoding"));
        }
        let v = parsed.unwrap();
        if !gt_in_subgroup(&v) {
            return Err(PyValueError::new_err("off-subgroup"));
        }
        Ok(GtEl { v })
    }

    fn to_bytes<'py>(&self, py: Python<'py>) -> Bound<'py, PyBytes> {
        PyBytes::new(py, &self.v.to_bytes())
    }

    /// Group operation (product of pairing values).
    fn combine(&self, other: &GtEl) -> Self {
        GtEl { v: self.v + other.v }
    }

    /// Exponentiation by a scalar given as 64-byte wide little-endian.
    fn exp(&self, scalar_wide_le: &[u8]) -> PyResult<Self> {
        Ok(GtEl {
            v: self.v * scalar_from_wide(scalar_wide_le)?,
        })
    }

    fn inv(&self) -> Self {
        GtEl { v: -self.v }
    }

    fn equals(&self, other: &GtEl) -> bool {
        self.v == other.v
    }

    fn is_identity(&self) -> bool {
        self.v.is_identity().into()
    }
}

#[pyfunction]
fn pair(a: &G1El, b: &G2El) -> GtEl {
    GtEl {
        v: pairing(&a.p.to_affine(), &b.p.to_affine()),
    }
}

/// Product of pairings over (G1, prepared G2) terms: one shared final exponentiation.
#[pyfunction]
fn multi_pair(py: Python<'_>, g1s: Vec<Py<G1El>>, preps: Vec<Py<G2Prep>>) -> PyResult<GtEl> {
    if g1s.len() != preps.len() {
        return Err(PyValueError::new_err("multi-pair-length-mismatch"));
    }
    let affines: Vec<G1Affine> = g1s
        .iter()
        .map(|g| g.borrow(py).p.to_affine())
        .collect();
    let prep_refs: Vec<PyRef<'_, G2Prep>> = preps.iter().map(|q| q.borrow(py)).collect();
    let terms: Vec<(&G1Affine, &G2Prepared)> = affines
        .iter()
        .zip(prep_refs.iter())
        .map(|(a, q)| (a, &q.prep))
        .collect();
    Ok(GtEl {
        v: multi_miller_loop(&terms).final_exponentiation(),
    })
}

#[pymodule]
#[pyo3(name = "_pairing_native")]
fn pairing_native(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<G1El>()?;
    m.add_class::<G2El>()?;
    m.add_class::<GtEl>()?;
    m.add_class::<G2Prep>()?;
    m.add_function(wrap_pyfunction!(pair, m)?)?;
    m.add_function(wrap_pyfunction!(multi_pair, m)?)?;
    m.add("G1_LEN", G1_LEN)?;
    m.add("G2_LEN", G2_LEN)?;
    m.add("GT_LEN", GT_LEN)?;
    m.add(
        "ORDER",
        "0x73eda753299d7d483339d80809a1d80553bda402fffe5bfeffffffff00000001",
    )?;
    Ok(())
}
