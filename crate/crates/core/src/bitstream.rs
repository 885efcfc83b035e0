//! `.q2l` configuration bitstreams.
//!
//! A file is a sequence of bitstreams, each a 24-byte header followed by one
//! 44-byte record per QPU. Everything is little-endian.
//!
//! Header:
//!
//! | bytes | field |
//! |-------|-------|
//! | 0..4  | magic `Q2LG` |
//! | 4..6  | version (u16, = 1) |
//! | 6..8  | reserved |
//! | 8     | n_qubits (u8) |
//! | 9     | n_qpu (u8) |
//! | 10    | n_sysqbits (u8) |
//! | 11    | reserved |
//! | 12..14| write-back rotation (i16) |
//! | 14..16| reserved |
//! | 16..20| bitstream index (u32) |
//! | 20..24| reserved |
//!
//! QPU record:
//!
//! | bytes | field |
//! |-------|-------|
//! | 0..32 | m00, m01, m10, m11 as (re, im) f32 pairs |
//! | 32    | opcode: 0 NOP, 1 unary, 2 controlled |
//! | 33    | target physical bit |
//! | 34    | control physical bit (0 when unused) |
//! | 35    | flags (reserved) |
//! | 36..40| gate id (u32) |
//! | 40..44| reserved |

use num_complex::Complex32;
use thiserror::Error;

use crate::matrix::GateMatrix;
use crate::scheduler::{BitstreamPlan, PlacedGate, Slot, SystemConfig};

pub const MAGIC: [u8; 4] = *b"Q2LG";
pub const VERSION: u16 = 1;
pub const HEADER_LEN: usize = 24;
pub const RECORD_LEN: usize = 44;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BitstreamError {
    #[error("offset {offset}: bad magic {found:02x?}")]
    BadMagic { offset: usize, found: [u8; 4] },
    #[error("offset {offset}: unsupported version {found}")]
    Version { offset: usize, found: u16 },
    #[error("offset {offset}: truncated stream, expected {expected} bytes, {actual} available")]
    Truncated { offset: usize, expected: usize, actual: usize },
    #[error("offset {offset}: invalid opcode {value}")]
    InvalidOpcode { offset: usize, value: u8 },
    #[error("offset {offset}: target bit {target} outside the {window}-bit window")]
    TargetOutOfWindow { offset: usize, target: u8, window: usize },
    #[error("offset {offset}: control bit {control} invalid for {n_qubits} qubits and target {target}")]
    BadControl { offset: usize, control: u8, target: u8, n_qubits: usize },
    #[error("offset {offset}: NOP record must carry the identity matrix")]
    NopNotIdentity { offset: usize },
    #[error("offset {offset}: rotation {rotation} outside (-{n_qubits}, {n_qubits})")]
    RotationOutOfRange { offset: usize, rotation: i16, n_qubits: usize },
    #[error("offset {offset}: {message}")]
    BadHeader { offset: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Opcode {
    Nop = 0,
    Unary = 1,
    Controlled = 2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BitstreamHeader {
    pub n_qubits: u8,
    pub n_qpu: u8,
    pub n_sysqbits: u8,
    pub rotation: i16,
    pub index: u32,
}

impl BitstreamHeader {
    pub fn to_bytes(&self) -> [u8; HEADER_LEN] {
        let mut b = [0u8; HEADER_LEN];
        b[0..4].copy_from_slice(&MAGIC);
        b[4..6].copy_from_slice(&VERSION.to_le_bytes());
        b[8] = self.n_qubits;
        b[9] = self.n_qpu;
        b[10] = self.n_sysqbits;
        b[12..14].copy_from_slice(&self.rotation.to_le_bytes());
        b[16..20].copy_from_slice(&self.index.to_le_bytes());
        b
    }

    pub fn from_bytes(b: &[u8], offset: usize) -> Result<Self, BitstreamError> {
        if b.len() < HEADER_LEN {
            return Err(BitstreamError::Truncated { offset, expected: HEADER_LEN, actual: b.len() });
        }
        let magic: [u8; 4] = b[0..4].try_into().unwrap();
        if magic != MAGIC {
            return Err(BitstreamError::BadMagic { offset, found: magic });
        }
        let version = u16::from_le_bytes([b[4], b[5]]);
        if version != VERSION {
            return Err(BitstreamError::Version { offset: offset + 4, found: version });
        }
        let h = BitstreamHeader {
            n_qubits: b[8],
            n_qpu: b[9],
            n_sysqbits: b[10],
            rotation: i16::from_le_bytes([b[12], b[13]]),
            index: u32::from_le_bytes(b[16..20].try_into().unwrap()),
        };
        let zero = |field: &str| BitstreamError::BadHeader { offset, message: format!("{field} is zero") };
        if h.n_qubits == 0 {
            return Err(zero("n_qubits"));
        }
        if h.n_qpu == 0 {
            return Err(zero("n_qpu"));
        }
        if h.n_sysqbits == 0 {
            return Err(zero("n_sysqbits"));
        }
        if h.rotation.unsigned_abs() as usize >= h.n_qubits as usize {
            return Err(BitstreamError::RotationOutOfRange {
                offset: offset + 12,
                rotation: h.rotation,
                n_qubits: h.n_qubits as usize,
            });
        }
        Ok(h)
    }

    pub fn config(&self) -> SystemConfig {
        SystemConfig { n_qpu: self.n_qpu as usize, n_sysqbits: self.n_sysqbits as usize, n_qubits: self.n_qubits as usize }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QpuRecord {
    pub matrix: [Complex32; 4],
    pub opcode: Opcode,
    pub target: u8,
    pub control: u8,
    pub gate_id: u32,
}

impl QpuRecord {
    pub fn nop() -> Self {
        QpuRecord { matrix: GateMatrix::identity().to_f32(), opcode: Opcode::Nop, target: 0, control: 0, gate_id: 0 }
    }

    pub fn from_slot(slot: &Slot) -> Self {
        match slot {
            Slot::Nop => QpuRecord::nop(),
            Slot::Gate(g) => QpuRecord {
                matrix: g.matrix.to_f32(),
                opcode: if g.control.is_some() { Opcode::Controlled } else { Opcode::Unary },
                target: u8::try_from(g.target).expect("target position fits a byte"),
                control: g.control.map_or(0, |c| u8::try_from(c).expect("control position fits a byte")),
                gate_id: u32::try_from(g.gate_id).expect("gate id fits 32 bits"),
            },
        }
    }

    pub fn to_slot(&self) -> Slot {
        match self.opcode {
            Opcode::Nop => Slot::Nop,
            op => Slot::Gate(PlacedGate {
                gate_id: self.gate_id as usize,
                target: self.target as usize,
                control: (op == Opcode::Controlled).then_some(self.control as usize),
                matrix: GateMatrix::from_f32(self.matrix),
            }),
        }
    }

    pub fn to_bytes(&self) -> [u8; RECORD_LEN] {
        let mut b = [0u8; RECORD_LEN];
        for (i, c) in self.matrix.iter().enumerate() {
            b[8 * i..8 * i + 4].copy_from_slice(&c.re.to_le_bytes());
            b[8 * i + 4..8 * i + 8].copy_from_slice(&c.im.to_le_bytes());
        }
        b[32] = self.opcode as u8;
        b[33] = self.target;
        b[34] = self.control;
        b[36..40].copy_from_slice(&self.gate_id.to_le_bytes());
        b
    }

    /// Parses and validates one record against its bitstream header.
    pub fn from_bytes(b: &[u8], header: &BitstreamHeader, offset: usize) -> Result<Self, BitstreamError> {
        if b.len() < RECORD_LEN {
            return Err(BitstreamError::Truncated { offset, expected: RECORD_LEN, actual: b.len() });
        }
        let f = |at: usize| f32::from_le_bytes(b[at..at + 4].try_into().unwrap());
        let matrix = [0, 1, 2, 3].map(|i| Complex32::new(f(8 * i), f(8 * i + 4)));
        let opcode = match b[32] {
            0 => Opcode::Nop,
            1 => Opcode::Unary,
            2 => Opcode::Controlled,
            value => return Err(BitstreamError::InvalidOpcode { offset: offset + 32, value }),
        };
        let (target, control) = (b[33], b[34]);
        let n = header.n_qubits as usize;
        let window = header.config().window();
        match opcode {
            Opcode::Nop => {
                if matrix != GateMatrix::identity().to_f32() {
                    return Err(BitstreamError::NopNotIdentity { offset });
                }
                return Ok(QpuRecord::nop());
            }
            Opcode::Unary | Opcode::Controlled => {
                if target as usize >= window {
                    return Err(BitstreamError::TargetOutOfWindow { offset: offset + 33, target, window });
                }
            }
        }
        if opcode == Opcode::Controlled && (control as usize >= n || control == target) {
            return Err(BitstreamError::BadControl { offset: offset + 34, control, target, n_qubits: n });
        }
        Ok(QpuRecord {
            matrix,
            opcode,
            target,
            control: if opcode == Opcode::Controlled { control } else { 0 },
            gate_id: u32::from_le_bytes(b[36..40].try_into().unwrap()),
        })
    }
}

/// Header plus QPU records: what the device consumes for one pass.
#[derive(Debug, Clone, PartialEq)]
pub struct Bitstream {
    pub header: BitstreamHeader,
    pub records: Vec<QpuRecord>,
}

impl Bitstream {
    pub fn from_plan(plan: &BitstreamPlan, cfg: &SystemConfig, index: usize) -> Self {
        assert_eq!(plan.slots.len(), cfg.n_qpu, "plan has one slot per QPU");
        Bitstream {
            header: BitstreamHeader {
                n_qubits: cfg.n_qubits as u8,
                n_qpu: cfg.n_qpu as u8,
                n_sysqbits: cfg.n_sysqbits as u8,
                rotation: plan.rotation_out as i16,
                index: index as u32,
            },
            records: plan.slots.iter().map(QpuRecord::from_slot).collect(),
        }
    }

    pub fn write_to(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.header.to_bytes());
        for r in &self.records {
            out.extend_from_slice(&r.to_bytes());
        }
    }

    pub fn byte_len(&self) -> usize {
        HEADER_LEN + RECORD_LEN * self.records.len()
    }
}

pub fn plans_to_bitstreams(plans: &[BitstreamPlan], cfg: &SystemConfig) -> Vec<Bitstream> {
    plans.iter().enumerate().map(|(i, p)| Bitstream::from_plan(p, cfg, i)).collect()
}

/// Serializes plans in execution order; matrices are rounded to single precision.
pub fn encode(plans: &[BitstreamPlan], cfg: &SystemConfig) -> Vec<u8> {
    let mut out = Vec::with_capacity(plans.len() * (HEADER_LEN + RECORD_LEN * cfg.n_qpu));
    for b in plans_to_bitstreams(plans, cfg) {
        b.write_to(&mut out);
    }
    out
}

/// Parses and validates every bitstream in a `.q2l` byte stream.
pub fn decode_bitstreams(bytes: &[u8]) -> Result<Vec<Bitstream>, BitstreamError> {
    if bytes.is_empty() {
        return Err(BitstreamError::Truncated { offset: 0, expected: HEADER_LEN, actual: 0 });
    }
    let mut out: Vec<Bitstream> = Vec::new();
    let mut offset = 0;
    while offset < bytes.len() {
        let header = BitstreamHeader::from_bytes(&bytes[offset..], offset)?;
        let len = HEADER_LEN + RECORD_LEN * header.n_qpu as usize;
        let available = bytes.len() - offset;
        if available < len {
            return Err(BitstreamError::Truncated { offset, expected: len, actual: available });
        }
        if let Some(first) = out.first() {
            let f = &first.header;
            if (f.n_qubits, f.n_qpu, f.n_sysqbits) != (header.n_qubits, header.n_qpu, header.n_sysqbits) {
                return Err(BitstreamError::BadHeader { offset, message: "system config differs from first bitstream".into() });
            }
        }
        if header.index as usize != out.len() {
            return Err(BitstreamError::BadHeader {
                offset: offset + 16,
                message: format!("bitstream index {} where {} expected", header.index, out.len()),
            });
        }
        let records = (0..header.n_qpu as usize)
            .map(|i| {
                let at = offset + HEADER_LEN + i * RECORD_LEN;
                QpuRecord::from_bytes(&bytes[at..at + RECORD_LEN], &header, at)
            })
            .collect::<Result<Vec<_>, _>>()?;
        out.push(Bitstream { header, records });
        offset += len;
    }
    Ok(out)
}

/// Inverse of [`encode`]; window starts are rebuilt by chaining rotations from 0.
pub fn decode(bytes: &[u8]) -> Result<(SystemConfig, Vec<BitstreamPlan>), BitstreamError> {
    let bitstreams = decode_bitstreams(bytes)?;
    let cfg = bitstreams[0].header.config();
    let n = cfg.n_qubits as i64;
    let mut s = 0i64;
    let plans = bitstreams
        .iter()
        .map(|b| {
            let plan = BitstreamPlan {
                window_start: s as usize,
                slots: b.records.iter().map(QpuRecord::to_slot).collect(),
                rotation_out: b.header.rotation as i32,
            };
            s = (s + b.header.rotation as i64).rem_euclid(n);
            plan
        })
        .collect();
    Ok((cfg, plans))
}
