//! Bit-exact Hello beacon layout.
//!
//! Field order (each field little-endian, fields packed LSB-first):
//! id 7 | x 9 | y 9 | next waypoint 12 | 5×5 pheromone patch 25×6 | hops to BS 4 |
//! mask cell 12 | En 8 | IL 8 | [summary count 7 | summaries 32 each].

use crate::grid::{AreaMap, CellIndex, Vec2};
use crate::NodeId;

pub const ID_BITS: u32 = 7;
pub const COORD_BITS: u32 = 9;
pub const LOCATION_BITS: u32 = 2 * COORD_BITS;
pub const WAYPOINT_BITS: u32 = 12;
pub const PATCH_SIDE: usize = 5;
pub const PATCH_CELLS: usize = PATCH_SIDE * PATCH_SIDE;
pub const PATCH_VALUE_BITS: u32 = 6;
pub const HOP_BITS: u32 = 4;
pub const MASK_BITS: u32 = 12;
pub const EN_BITS: u32 = 8;
pub const IL_BITS: u32 = 8;
pub const SUMMARY_COUNT_BITS: u32 = 7;
/// id 7 + LLT 9 + En 7 + IL 8 + active 1.
pub const SUMMARY_BITS: u32 = 32;

/// Bits before the En/IL trailer.
pub const FIXED_BITS: u32 = ID_BITS + LOCATION_BITS + WAYPOINT_BITS + PATCH_CELLS as u32 * PATCH_VALUE_BITS + HOP_BITS + MASK_BITS;

/// Location quantum in meters.
pub const LOCATION_RES_M: f64 = 10.0;
/// Hop count value meaning "no route to the BS".
pub const NO_ROUTE_HOPS: u8 = 15;
/// Pheromone quantization: levels per unit of pheromone.
pub const PATCH_LEVELS_PER_UNIT: f64 = 8.0;

const NO_CELL: u64 = (1 << 12) - 1;

/// Per-neighbor link digest appended when the sender neighbors an active-route node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkSummary {
    pub neighbor: NodeId,
    pub llt_s: f64,
    pub en: f64,
    pub il: u32,
    pub active: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HelloPacket {
    pub id: NodeId,
    pub pos: Vec2,
    pub waypoint: CellIndex,
    /// Quantized pheromone levels, row-major from the lower-left of the 5×5
    /// patch around the sender's cell; off-grid cells are 0.
    pub patch: [u8; PATCH_CELLS],
    pub hops_to_bs: u8,
    pub mask_cell: Option<CellIndex>,
    pub en: f64,
    pub il: u32,
    pub summaries: Option<Vec<LinkSummary>>,
}

/// Fields that did not fit and were clamped during encoding.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Saturation {
    pub id: bool,
    pub location: bool,
    pub hops: bool,
    pub patch: bool,
    pub en: bool,
    pub il: bool,
    pub summaries: bool,
}

impl Saturation {
    pub fn any(&self) -> bool {
        self.id || self.location || self.hops || self.patch || self.en || self.il || self.summaries
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncodedHello {
    pub bytes: Vec<u8>,
    pub bits: u32,
    pub saturated: Saturation,
}

/// Size in bits of a Hello with `n_summaries` link digests (`None` = no digest block).
pub fn hello_bits(n_summaries: Option<usize>) -> u32 {
    FIXED_BITS
        + EN_BITS
        + IL_BITS
        + n_summaries.map_or(0, |n| SUMMARY_COUNT_BITS + n.min(max_value(SUMMARY_COUNT_BITS) as usize) as u32 * SUMMARY_BITS)
}

/// Quantizes a pheromone value to a patch level.
pub fn patch_level(value: f64) -> (u8, bool) {
    let max = max_value(PATCH_VALUE_BITS) as f64;
    let q = (value.max(0.0) * PATCH_LEVELS_PER_UNIT).round();
    if q > max {
        (max as u8, true)
    } else {
        (q as u8, false)
    }
}

pub fn patch_value(level: u8) -> f64 {
    f64::from(level) / PATCH_LEVELS_PER_UNIT
}

/// Quantizes one coordinate to the 10 m grid; returns the code and whether it saturated.
pub fn quantize_coord(v: f64) -> (u64, bool) {
    let max = max_value(COORD_BITS);
    let q = (v.max(0.0) / LOCATION_RES_M).round();
    if q > max as f64 {
        (max, true)
    } else {
        (q as u64, false)
    }
}

pub fn dequantize_coord(q: u64) -> f64 {
    q as f64 * LOCATION_RES_M
}

fn max_value(bits: u32) -> u64 {
    (1u64 << bits) - 1
}

fn saturate(v: u64, bits: u32, flag: &mut bool) -> u64 {
    let max = max_value(bits);
    if v > max {
        *flag = true;
        max
    } else {
        v
    }
}

/// LSB-first bit packer.
#[derive(Debug, Default)]
pub struct BitWriter {
    bytes: Vec<u8>,
    bits: u32,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends the low `width` bits of `value`, least significant first.
    pub fn put(&mut self, value: u64, width: u32) {
        debug_assert!(width <= 64 && (width == 64 || value >> width == 0));
        for k in 0..width {
            let byte = (self.bits / 8) as usize;
            if byte == self.bytes.len() {
                self.bytes.push(0);
            }
            if (value >> k) & 1 == 1 {
                self.bytes[byte] |= 1 << (self.bits % 8);
            }
            self.bits += 1;
        }
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn finish(self) -> (Vec<u8>, u32) {
        (self.bytes, self.bits)
    }
}

#[derive(Debug)]
pub struct BitReader<'a> {
    bytes: &'a [u8],
    pos: u32,
}

impl<'a> BitReader<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        BitReader { bytes, pos: 0 }
    }

    /// Reads `width` bits; `None` when the buffer runs out.
    pub fn get(&mut self, width: u32) -> Option<u64> {
        let mut v = 0u64;
        for k in 0..width {
            let byte = *self.bytes.get((self.pos / 8) as usize)?;
            if (byte >> (self.pos % 8)) & 1 == 1 {
                v |= 1 << k;
            }
            self.pos += 1;
        }
        Some(v)
    }

    pub fn position(&self) -> u32 {
        self.pos
    }
}

fn cell_code(map: &AreaMap, c: Option<CellIndex>) -> u64 {
    match c {
        Some(c) if map.in_grid(c) && (map.linear(c) as u64) < NO_CELL => map.linear(c) as u64,
        _ => NO_CELL,
    }
}

fn code_cell(map: &AreaMap, code: u64) -> Option<CellIndex> {
    if code == NO_CELL || code as usize >= map.n_cells() {
        None
    } else {
        Some(map.from_linear(code as usize))
    }
}

impl HelloPacket {
    pub fn encode(&self, map: &AreaMap) -> EncodedHello {
        let mut s = Saturation::default();
        let mut w = BitWriter::new();
        w.put(saturate(u64::from(self.id), ID_BITS, &mut s.id), ID_BITS);
        let (qx, sx) = quantize_coord(self.pos.x);
        let (qy, sy) = quantize_coord(self.pos.y);
        s.location = sx || sy;
        w.put(qx, COORD_BITS);
        w.put(qy, COORD_BITS);
        w.put(cell_code(map, Some(self.waypoint)), WAYPOINT_BITS);
        for &level in &self.patch {
            w.put(saturate(u64::from(level), PATCH_VALUE_BITS, &mut s.patch), PATCH_VALUE_BITS);
        }
        w.put(saturate(u64::from(self.hops_to_bs), HOP_BITS, &mut s.hops), HOP_BITS);
        w.put(cell_code(map, self.mask_cell), MASK_BITS);
        w.put(saturate(self.en.max(0.0).round() as u64, EN_BITS, &mut s.en), EN_BITS);
        w.put(saturate(u64::from(self.il), IL_BITS, &mut s.il), IL_BITS);
        if let Some(list) = &self.summaries {
            let n = saturate(list.len() as u64, SUMMARY_COUNT_BITS, &mut s.summaries);
            w.put(n, SUMMARY_COUNT_BITS);
            for l in list.iter().take(n as usize) {
                w.put(saturate(u64::from(l.neighbor), 7, &mut s.summaries), 7);
                w.put(saturate(l.llt_s.max(0.0).floor() as u64, 9, &mut s.summaries), 9);
                w.put(saturate(l.en.max(0.0).round() as u64, 7, &mut s.summaries), 7);
                w.put(saturate(u64::from(l.il), 8, &mut s.summaries), 8);
                w.put(u64::from(l.active), 1);
            }
        }
        let (bytes, bits) = w.finish();
        EncodedHello { bytes, bits, saturated: s }
    }

    /// Decodes a buffer produced by [`HelloPacket::encode`]; values come back quantized.
    pub fn decode(bytes: &[u8], map: &AreaMap) -> Option<HelloPacket> {
        let mut r = BitReader::new(bytes);
        let id = r.get(ID_BITS)? as NodeId;
        let x = dequantize_coord(r.get(COORD_BITS)?);
        let y = dequantize_coord(r.get(COORD_BITS)?);
        let waypoint = code_cell(map, r.get(WAYPOINT_BITS)?)?;
        let mut patch = [0u8; PATCH_CELLS];
        for p in patch.iter_mut() {
            *p = r.get(PATCH_VALUE_BITS)? as u8;
        }
        let hops_to_bs = r.get(HOP_BITS)? as u8;
        let mask_cell = code_cell(map, r.get(MASK_BITS)?);
        let en = r.get(EN_BITS)? as f64;
        let il = r.get(IL_BITS)? as u32;
        // A digest block is present only if the buffer holds more whole bits.
        let remaining = (bytes.len() as u32 * 8).saturating_sub(r.position());
        let summaries = if remaining >= SUMMARY_COUNT_BITS {
            let n = r.get(SUMMARY_COUNT_BITS)?;
            let mut list = Vec::with_capacity(n as usize);
            for _ in 0..n {
                list.push(LinkSummary {
                    neighbor: r.get(7)? as NodeId,
                    llt_s: r.get(9)? as f64,
                    en: r.get(7)? as f64,
                    il: r.get(8)? as u32,
                    active: r.get(1)? == 1,
                });
            }
            Some(list)
        } else {
            None
        };
        Some(HelloPacket { id, pos: Vec2::new(x, y), waypoint, patch, hops_to_bs, mask_cell, en, il, summaries })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn packet() -> HelloPacket {
        HelloPacket {
            id: 42,
            pos: Vec2::new(1234.4, 987.6),
            waypoint: CellIndex::new(12, 9),
            patch: std::array::from_fn(|i| (i * 2) as u8),
            hops_to_bs: 4,
            mask_cell: Some(CellIndex::new(30, 31)),
            en: 87.0,
            il: 5,
            summaries: None,
        }
    }

    #[test]
    fn fixed_part_is_203_bits() {
        assert_eq!(FIXED_BITS, 203);
        assert_eq!(hello_bits(None), 219);
        assert_eq!(hello_bits(Some(3)), 219 + 7 + 96);
    }

    #[test]
    fn location_quantization_round_trip() {
        let (qx, _) = quantize_coord(1234.4);
        let (qy, _) = quantize_coord(987.6);
        assert_eq!((qx, qy), (123, 99));
        assert_eq!((dequantize_coord(qx), dequantize_coord(qy)), (1230.0, 990.0));
    }

    #[test]
    fn encode_decode_round_trip() {
        let map = AreaMap::default();
        let p = packet();
        let enc = p.encode(&map);
        assert_eq!(enc.bits, hello_bits(None));
        assert!(!enc.saturated.any());
        let d = HelloPacket::decode(&enc.bytes, &map).unwrap();
        assert_eq!(d.pos, Vec2::new(1230.0, 990.0));
        assert_eq!((d.id, d.waypoint, d.patch, d.hops_to_bs, d.mask_cell, d.il), (p.id, p.waypoint, p.patch, 4, p.mask_cell, 5));
        assert_eq!(d.en, 87.0);
        assert_eq!(d.summaries, None);
    }

    #[test]
    fn summaries_round_trip() {
        let map = AreaMap::default();
        let mut p = packet();
        p.summaries = Some(vec![LinkSummary { neighbor: 7, llt_s: 25.0, en: 90.0, il: 3, active: true }]);
        let enc = p.encode(&map);
        assert_eq!(enc.bits, hello_bits(Some(1)));
        let d = HelloPacket::decode(&enc.bytes, &map).unwrap();
        assert_eq!(d.summaries, p.summaries);
    }

    #[test]
    fn overflow_saturates_and_flags() {
        let map = AreaMap::default();
        let mut p = packet();
        p.hops_to_bs = 40;
        p.pos = Vec2::new(5900.0, 10.0);
        let enc = p.encode(&map);
        assert!(enc.saturated.hops && enc.saturated.location);
        let d = HelloPacket::decode(&enc.bytes, &map).unwrap();
        assert_eq!(d.hops_to_bs, NO_ROUTE_HOPS);
        assert_eq!(d.pos.x, 5110.0);
    }

    #[test]
    fn no_mask_encodes_as_sentinel() {
        let map = AreaMap::default();
        let mut p = packet();
        p.mask_cell = None;
        let d = HelloPacket::decode(&p.encode(&map).bytes, &map).unwrap();
        assert_eq!(d.mask_cell, None);
    }

    #[test]
    fn bit_writer_is_lsb_first() {
        let mut w = BitWriter::new();
        w.put(0b1, 1);
        w.put(0b10, 2);
        let (bytes, bits) = w.finish();
        assert_eq!((bytes, bits), (vec![0b101], 3));
    }
}
