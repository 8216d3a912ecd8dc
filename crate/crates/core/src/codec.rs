//! Bit-exact base+delta tile codec and frame bitstream container.
//!
//! Each tile channel stores an 8-bit base (the channel minimum), a 4-bit
//! delta bit-length, and one unsigned delta per pixel — the base position
//! included, so addressing stays uniform. `bitlen = ceil(log2(range + 1))`
//! guarantees the widest delta fits; a uniform channel costs zero delta bits.
//! Tiles are packed back-to-back MSB-first with byte alignment only at the
//! frame level. The full layout is documented in `docs/FORMATS.md`.

use crate::color::SrgbColor;
use crate::frame::SrgbFrame;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CodecError {
    #[error("tile pixel count {got} does not match {n}x{n}")]
    TileSizeMismatch { got: usize, n: usize },
    #[error("tile size {0} not supported (must be 1..=255)")]
    InvalidTileSize(usize),
    #[error("bad magic {0:02x?}")]
    BadMagic([u8; 4]),
    #[error("unsupported bitstream version {0}")]
    UnsupportedVersion(u16),
    #[error("bitstream truncated")]
    Truncated,
    #[error("delta bit-length {0} exceeds 8")]
    InvalidBitLength(u8),
    #[error("frame is empty")]
    EmptyFrame,
    #[error("header dimensions {width}x{height} inconsistent with payload")]
    DimensionMismatch { width: u32, height: u32 },
}

/// An n×n block of sRGB pixels, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SrgbTile {
    n: usize,
    pixels: Vec<SrgbColor>,
}

impl SrgbTile {
    pub fn new(n: usize, pixels: Vec<SrgbColor>) -> Result<Self, CodecError> {
        if n == 0 || n > 255 {
            return Err(CodecError::InvalidTileSize(n));
        }
        if pixels.len() != n * n {
            return Err(CodecError::TileSizeMismatch {
                got: pixels.len(),
                n,
            });
        }
        Ok(Self { n, pixels })
    }

    pub fn uniform(n: usize, color: SrgbColor) -> Self {
        Self {
            n,
            pixels: vec![color; n * n],
        }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn pixels(&self) -> &[SrgbColor] {
        &self.pixels
    }

    /// Extracts the tile at tile-grid position (tx, ty) from a frame,
    /// replicating edge pixels when the tile hangs past the frame border.
    pub fn from_frame(frame: &SrgbFrame, n: usize, tx: usize, ty: usize) -> Self {
        let mut pixels = Vec::with_capacity(n * n);
        for row in 0..n {
            for col in 0..n {
                let (sx, sy) = clamp_coords(frame, n, tx, ty, col, row);
                pixels.push(frame.get(sx, sy));
            }
        }
        Self { n, pixels }
    }
}

/// Source pixel coordinates for tile slot (col, row), clamped to the frame.
pub(crate) fn clamp_coords(
    frame: &SrgbFrame,
    n: usize,
    tx: usize,
    ty: usize,
    col: usize,
    row: usize,
) -> (usize, usize) {
    let sx = (tx * n + col).min(frame.width() - 1);
    let sy = (ty * n + row).min(frame.height() - 1);
    (sx, sy)
}

/// One encoded channel: minimum-value base plus fixed-width deltas.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChannelCode {
    pub base: u8,
    pub bitlen: u8,
    pub deltas: Vec<u8>,
}

/// A fully encoded tile (three channels).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedTile {
    pub channels: [ChannelCode; 3],
    n: usize,
}

impl EncodedTile {
    pub fn size(&self) -> usize {
        self.n
    }

    pub fn pixel_count(&self) -> usize {
        self.n * self.n
    }
}

/// Bits needed for an unsigned value range: ceil(log2(range + 1)).
pub fn bitlen_for_range(range: u8) -> u8 {
    (8 - range.leading_zeros()) as u8
}

/// Encodes one tile: per channel, base = min, deltas = value − base.
pub fn encode_tile(tile: &SrgbTile) -> EncodedTile {
    let n = tile.size();
    let channels = std::array::from_fn(|c| {
        let mut min = u8::MAX;
        let mut max = u8::MIN;
        for p in tile.pixels() {
            let v = p.channel(c);
            min = min.min(v);
            max = max.max(v);
        }
        let deltas = tile.pixels().iter().map(|p| p.channel(c) - min).collect();
        ChannelCode {
            base: min,
            bitlen: bitlen_for_range(max - min),
            deltas,
        }
    });
    EncodedTile { channels, n }
}

/// Reconstructs the tile: pixel = base + delta per channel.
pub fn decode_tile(encoded: &EncodedTile) -> SrgbTile {
    let count = encoded.pixel_count();
    let mut pixels = Vec::with_capacity(count);
    for i in 0..count {
        pixels.push(SrgbColor::new(
            encoded.channels[0].base + encoded.channels[0].deltas[i],
            encoded.channels[1].base + encoded.channels[1].deltas[i],
            encoded.channels[2].base + encoded.channels[2].deltas[i],
        ));
    }
    SrgbTile {
        n: encoded.n,
        pixels,
    }
}

/// Per-channel metadata cost: 8-bit base + 4-bit bit-length field.
pub const CHANNEL_OVERHEAD_BITS: u64 = 12;
/// Fixed per-tile cost across the three channels.
pub const TILE_OVERHEAD_BITS: u64 = 3 * CHANNEL_OVERHEAD_BITS;

/// Exact packed size of a tile record in bits: 3×(8+4) + Σ N·bitlen.
/// This is the codec cost the adjuster minimizes.
pub fn bits_of(encoded: &EncodedTile) -> u64 {
    let n2 = encoded.pixel_count() as u64;
    TILE_OVERHEAD_BITS
        + encoded
            .channels
            .iter()
            .map(|ch| n2 * ch.bitlen as u64)
            .sum::<u64>()
}

/// Split of a tile's bit cost into the report categories.
pub fn tile_bit_categories(encoded: &EncodedTile) -> (u64, u64, u64) {
    let base = 3 * 8;
    let metadata = 3 * 4;
    let delta = bits_of(encoded) - TILE_OVERHEAD_BITS;
    (base, metadata, delta)
}

pub const BITSTREAM_MAGIC: [u8; 4] = *b"PBD1";
pub const BITSTREAM_VERSION: u16 = 1;
/// Fixed header size: magic, version, flags, width, height, tile size,
/// gaze x, gaze y.
pub const HEADER_BYTES: usize = 4 + 2 + 2 + 4 + 4 + 2 + 4 + 4;

/// Frame-level metadata carried in the bitstream header.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameHeader {
    pub width: u32,
    pub height: u32,
    pub tile_size: u16,
    pub gaze_x: f32,
    pub gaze_y: f32,
    pub flags: u16,
}

impl FrameHeader {
    pub fn tiles_x(&self) -> usize {
        (self.width as usize).div_ceil(self.tile_size as usize)
    }

    pub fn tiles_y(&self) -> usize {
        (self.height as usize).div_ceil(self.tile_size as usize)
    }

    pub fn tile_count(&self) -> usize {
        self.tiles_x() * self.tiles_y()
    }
}

/// An encoded frame: header plus tile records in row-major tile order.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameBitstream {
    pub header: FrameHeader,
    pub tiles: Vec<EncodedTile>,
}

impl FrameBitstream {
    /// Total encoded size in bits, byte-aligned at the frame level:
    /// header bits + Σ tile bits, rounded up to a whole byte.
    pub fn total_bits(&self) -> u64 {
        let payload: u64 = self.tiles.iter().map(bits_of).sum();
        let raw = HEADER_BYTES as u64 * 8 + payload;
        raw.div_ceil(8) * 8
    }

    /// Serializes to the packed wire format.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity((self.total_bits() / 8) as usize);
        out.extend_from_slice(&BITSTREAM_MAGIC);
        out.extend_from_slice(&BITSTREAM_VERSION.to_le_bytes());
        out.extend_from_slice(&self.header.flags.to_le_bytes());
        out.extend_from_slice(&self.header.width.to_le_bytes());
        out.extend_from_slice(&self.header.height.to_le_bytes());
        out.extend_from_slice(&self.header.tile_size.to_le_bytes());
        out.extend_from_slice(&self.header.gaze_x.to_le_bytes());
        out.extend_from_slice(&self.header.gaze_y.to_le_bytes());

        let mut writer = BitWriter::new(out);
        for tile in &self.tiles {
            for ch in &tile.channels {
                writer.write(ch.base as u32, 8);
                writer.write(ch.bitlen as u32, 4);
                for &d in &ch.deltas {
                    writer.write(d as u32, ch.bitlen);
                }
            }
        }
        writer.finish()
    }

    /// Parses the packed wire format back into tiles.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CodecError> {
        if bytes.len() < HEADER_BYTES {
            return Err(CodecError::Truncated);
        }
        let magic: [u8; 4] = bytes[0..4].try_into().unwrap();
        if magic != BITSTREAM_MAGIC {
            return Err(CodecError::BadMagic(magic));
        }
        let version = u16::from_le_bytes(bytes[4..6].try_into().unwrap());
        if version != BITSTREAM_VERSION {
            return Err(CodecError::UnsupportedVersion(version));
        }
        let flags = u16::from_le_bytes(bytes[6..8].try_into().unwrap());
        let width = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
        let height = u32::from_le_bytes(bytes[12..16].try_into().unwrap());
        let tile_size = u16::from_le_bytes(bytes[16..18].try_into().unwrap());
        let gaze_x = f32::from_le_bytes(bytes[18..22].try_into().unwrap());
        let gaze_y = f32::from_le_bytes(bytes[22..26].try_into().unwrap());
        if width == 0 || height == 0 {
            return Err(CodecError::EmptyFrame);
        }
        if tile_size == 0 {
            return Err(CodecError::InvalidTileSize(0));
        }
        let header = FrameHeader {
            width,
            height,
            tile_size,
            gaze_x,
            gaze_y,
            flags,
        };

        let n = tile_size as usize;
        let count = n * n;
        let mut reader = BitReader::new(&bytes[HEADER_BYTES..]);
        let mut tiles = Vec::with_capacity(header.tile_count());
        for _ in 0..header.tile_count() {
            let channels: [ChannelCode; 3] = [
                read_channel(&mut reader, count)?,
                read_channel(&mut reader, count)?,
                read_channel(&mut reader, count)?,
            ];
            tiles.push(EncodedTile { channels, n });
        }
        Ok(Self { header, tiles })
    }
}

fn read_channel(reader: &mut BitReader<'_>, count: usize) -> Result<ChannelCode, CodecError> {
    let base = reader.read(8)? as u8;
    let bitlen = reader.read(4)? as u8;
    if bitlen > 8 {
        return Err(CodecError::InvalidBitLength(bitlen));
    }
    let mut deltas = Vec::with_capacity(count);
    for _ in 0..count {
        deltas.push(reader.read(bitlen)? as u8);
    }
    Ok(ChannelCode {
        base,
        bitlen,
        deltas,
    })
}

/// Encodes a frame with plain base+delta (no color adjustment), zero gaze.
pub fn encode_frame(frame: &SrgbFrame, tile_size: usize) -> Result<FrameBitstream, CodecError> {
    encode_frame_with(frame, tile_size, 0.0, 0.0, 0)
}

/// Encodes a frame with explicit header metadata. Frames whose dimensions are
/// not multiples of the tile size are edge-replicated out to the next
/// multiple; the header records the true dimensions and decode crops back.
pub fn encode_frame_with(
    frame: &SrgbFrame,
    tile_size: usize,
    gaze_x: f32,
    gaze_y: f32,
    flags: u16,
) -> Result<FrameBitstream, CodecError> {
    let header = frame_header(frame, tile_size, gaze_x, gaze_y, flags)?;
    let mut tiles = Vec::with_capacity(header.tile_count());
    for ty in 0..header.tiles_y() {
        for tx in 0..header.tiles_x() {
            let tile = SrgbTile::from_frame(frame, tile_size, tx, ty);
            tiles.push(encode_tile(&tile));
        }
    }
    Ok(FrameBitstream { header, tiles })
}

pub(crate) fn frame_header(
    frame: &SrgbFrame,
    tile_size: usize,
    gaze_x: f32,
    gaze_y: f32,
    flags: u16,
) -> Result<FrameHeader, CodecError> {
    if frame.width() == 0 || frame.height() == 0 {
        return Err(CodecError::EmptyFrame);
    }
    if tile_size == 0 || tile_size > u16::MAX as usize {
        return Err(CodecError::InvalidTileSize(tile_size));
    }
    Ok(FrameHeader {
        width: frame.width() as u32,
        height: frame.height() as u32,
        tile_size: tile_size as u16,
        gaze_x,
        gaze_y,
        flags,
    })
}

/// Decodes a frame bitstream back to sRGB pixels, cropping any padding.
pub fn decode_frame(bs: &FrameBitstream) -> Result<SrgbFrame, CodecError> {
    let header = &bs.header;
    if bs.tiles.len() != header.tile_count() {
        return Err(CodecError::DimensionMismatch {
            width: header.width,
            height: header.height,
        });
    }
    let width = header.width as usize;
    let height = header.height as usize;
    let n = header.tile_size as usize;
    let mut frame = SrgbFrame::filled(width, height, SrgbColor::default());
    for (idx, encoded) in bs.tiles.iter().enumerate() {
        if encoded.size() != n {
            return Err(CodecError::TileSizeMismatch {
                got: encoded.size() * encoded.size(),
                n,
            });
        }
        let tx = idx % header.tiles_x();
        let ty = idx / header.tiles_x();
        let tile = decode_tile(encoded);
        for row in 0..n {
            let y = ty * n + row;
            if y >= height {
                break;
            }
            for col in 0..n {
                let x = tx * n + col;
                if x >= width {
                    break;
                }
                frame.set(x, y, tile.pixels()[row * n + col]);
            }
        }
    }
    Ok(frame)
}

/// MSB-first bit packer appending to a byte buffer.
struct BitWriter {
    bytes: Vec<u8>,
    /// Bits already used in the final byte (0 = byte boundary).
    used: u8,
}

impl BitWriter {
    fn new(bytes: Vec<u8>) -> Self {
        Self { bytes, used: 0 }
    }

    fn write(&mut self, value: u32, nbits: u8) {
        debug_assert!(nbits <= 32);
        debug_assert!(nbits == 32 || value < (1u32 << nbits));
        let mut remaining = nbits;
        while remaining > 0 {
            if self.used == 0 {
                self.bytes.push(0);
            }
            let space = 8 - self.used;
            let take = remaining.min(space);
            let shift = remaining - take;
            let chunk = ((value >> shift) & ((1u32 << take) - 1)) as u8;
            let last = self.bytes.last_mut().unwrap();
            *last |= chunk << (space - take);
            self.used = (self.used + take) % 8;
            remaining -= take;
        }
    }

    fn finish(self) -> Vec<u8> {
        self.bytes
    }
}

/// MSB-first bit reader over a byte slice.
struct BitReader<'a> {
    bytes: &'a [u8],
    pos_bits: usize,
}

impl<'a> BitReader<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos_bits: 0 }
    }

    fn read(&mut self, nbits: u8) -> Result<u32, CodecError> {
        if nbits == 0 {
            return Ok(0);
        }
        if self.pos_bits + nbits as usize > self.bytes.len() * 8 {
            return Err(CodecError::Truncated);
        }
        let mut value = 0u32;
        for _ in 0..nbits {
            let byte = self.bytes[self.pos_bits / 8];
            let bit = (byte >> (7 - self.pos_bits % 8)) & 1;
            value = (value << 1) | bit as u32;
            self.pos_bits += 1;
        }
        Ok(value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::util::SplitMix64;
    use proptest::prelude::*;

    fn random_tile(rng: &mut SplitMix64, n: usize) -> SrgbTile {
        let pixels = (0..n * n)
            .map(|_| {
                SrgbColor::new(
                    rng.next_below(256) as u8,
                    rng.next_below(256) as u8,
                    rng.next_below(256) as u8,
                )
            })
            .collect();
        SrgbTile::new(n, pixels).unwrap()
    }

    fn random_frame(rng: &mut SplitMix64, w: usize, h: usize) -> SrgbFrame {
        SrgbFrame::from_fn(w, h, |_, _| {
            SrgbColor::new(
                rng.next_below(256) as u8,
                rng.next_below(256) as u8,
                rng.next_below(256) as u8,
            )
        })
    }

    #[test]
    fn bitlen_table() {
        let expect = [
            (0u8, 0u8),
            (1, 1),
            (2, 2),
            (3, 2),
            (4, 3),
            (7, 3),
            (8, 4),
            (127, 7),
            (128, 8),
            (255, 8),
        ];
        for (range, bits) in expect {
            assert_eq!(bitlen_for_range(range), bits, "range {range}");
        }
    }

    #[test]
    fn uniform_tile_costs_overhead_only() {
        let tile = SrgbTile::uniform(4, SrgbColor::new(95, 95, 95));
        let enc = encode_tile(&tile);
        for ch in &enc.channels {
            assert_eq!(ch.base, 95);
            assert_eq!(ch.bitlen, 0);
        }
        assert_eq!(bits_of(&enc), 36);
    }

    #[test]
    fn range_seven_needs_three_bits() {
        let mut pixels = vec![SrgbColor::new(10, 10, 10); 16];
        pixels[5] = SrgbColor::new(17, 10, 10);
        let enc = encode_tile(&SrgbTile::new(4, pixels).unwrap());
        assert_eq!(enc.channels[0].bitlen, 3);
    }

    #[test]
    fn bits_of_arithmetic_example() {
        // bitlens (3, 0, 2) on a 4x4 tile: 36 + 16*5 = 116.
        let mut rng = SplitMix64::new(1);
        let tile = SrgbTile::new(
            4,
            (0..16)
                .map(|_| {
                    SrgbColor::new(
                        100 + rng.next_below(8) as u8, // range ≤ 7 → 3 bits
                        40,                            // uniform → 0 bits
                        200 + rng.next_below(4) as u8, // range ≤ 3 → 2 bits
                    )
                })
                .collect(),
        )
        .unwrap();
        // Force the exact ranges.
        let mut pixels = tile.pixels().to_vec();
        pixels[0] = SrgbColor::new(100, 40, 200);
        pixels[1] = SrgbColor::new(107, 40, 203);
        let enc = encode_tile(&SrgbTile::new(4, pixels).unwrap());
        assert_eq!(enc.channels[0].bitlen, 3);
        assert_eq!(enc.channels[1].bitlen, 0);
        assert_eq!(enc.channels[2].bitlen, 2);
        assert_eq!(bits_of(&enc), 116);
    }

    #[test]
    fn tile_roundtrip_many() {
        let mut rng = SplitMix64::new(2024);
        for _ in 0..10_000 {
            let n = [2usize, 4, 8][rng.next_below(3) as usize];
            let tile = random_tile(&mut rng, n);
            let back = decode_tile(&encode_tile(&tile));
            assert_eq!(tile, back);
        }
    }

    #[test]
    fn bits_match_packed_length() {
        let mut rng = SplitMix64::new(99);
        for _ in 0..500 {
            let w = 1 + rng.next_below(40) as usize;
            let h = 1 + rng.next_below(40) as usize;
            let n = [2usize, 4, 8, 16][rng.next_below(4) as usize];
            let frame = random_frame(&mut rng, w, h);
            let bs = encode_frame(&frame, n).unwrap();
            let bytes = bs.to_bytes();
            assert_eq!(bytes.len() as u64 * 8, bs.total_bits());
        }
    }

    #[test]
    fn one_pixel_frame_pads_and_crops() {
        let frame = SrgbFrame::filled(1, 1, SrgbColor::new(1, 2, 3));
        let bs = encode_frame(&frame, 4).unwrap();
        assert_eq!(bs.tiles.len(), 1);
        let decoded = decode_frame(&bs).unwrap();
        assert_eq!(decoded, frame);
    }

    #[test]
    fn frame_roundtrip_through_bytes() {
        let mut rng = SplitMix64::new(7);
        for &(w, h, n) in &[(1usize, 1usize, 2usize), (5, 3, 4), (17, 9, 8), (33, 31, 16)] {
            let frame = random_frame(&mut rng, w, h);
            let bs = encode_frame(&frame, n).unwrap();
            let parsed = FrameBitstream::from_bytes(&bs.to_bytes()).unwrap();
            assert_eq!(parsed, bs);
            assert_eq!(decode_frame(&parsed).unwrap(), frame);
        }
    }

    #[test]
    fn decode_rejects_bad_magic() {
        let frame = SrgbFrame::filled(4, 4, SrgbColor::new(9, 9, 9));
        let mut bytes = encode_frame(&frame, 4).unwrap().to_bytes();
        bytes[0] = b'X';
        assert!(matches!(
            FrameBitstream::from_bytes(&bytes),
            Err(CodecError::BadMagic(_))
        ));
    }

    #[test]
    fn decode_rejects_bad_version() {
        let frame = SrgbFrame::filled(4, 4, SrgbColor::new(9, 9, 9));
        let mut bytes = encode_frame(&frame, 4).unwrap().to_bytes();
        bytes[4] = 0xEE;
        assert!(matches!(
            FrameBitstream::from_bytes(&bytes),
            Err(CodecError::UnsupportedVersion(_))
        ));
    }

    #[test]
    fn decode_rejects_truncation() {
        let mut rng = SplitMix64::new(5);
        let frame = random_frame(&mut rng, 16, 16);
        let bytes = encode_frame(&frame, 4).unwrap().to_bytes();
        for cut in [HEADER_BYTES - 1, HEADER_BYTES + 3, bytes.len() - 1] {
            assert!(FrameBitstream::from_bytes(&bytes[..cut]).is_err());
        }
    }

    #[test]
    fn decode_rejects_bitlen_over_eight() {
        // Hand-build a stream whose first channel claims 9 delta bits.
        let frame = SrgbFrame::filled(2, 2, SrgbColor::new(0, 0, 0));
        let bs = encode_frame(&frame, 2).unwrap();
        let mut bytes = bs.to_bytes();
        // First tile starts right after the header: 8 bits base then 4 bits
        // bitlen. Base is 0, so setting the nibble to 9 is surgical.
        bytes[HEADER_BYTES + 1] = 0b1001_0000;
        assert!(matches!(
            FrameBitstream::from_bytes(&bytes),
            Err(CodecError::InvalidBitLength(9))
        ));
    }

    #[test]
    fn cost_non_increasing_when_range_shrinks() {
        for range in 0..255u8 {
            let wide = encode_tile(&two_value_tile(10, 10 + range + 1));
            let narrow = encode_tile(&two_value_tile(10, 10 + range));
            assert!(bits_of(&narrow) <= bits_of(&wide));
        }
    }

    fn two_value_tile(lo: u8, hi: u8) -> SrgbTile {
        let mut pixels = vec![SrgbColor::new(lo, lo, lo); 16];
        pixels[3] = SrgbColor::new(hi, hi, hi);
        SrgbTile::new(4, pixels).unwrap()
    }

    #[test]
    fn encoding_is_deterministic() {
        let mut rng = SplitMix64::new(123);
        let frame = random_frame(&mut rng, 31, 17);
        let a = encode_frame(&frame, 4).unwrap().to_bytes();
        let b = encode_frame(&frame, 4).unwrap().to_bytes();
        assert_eq!(a, b);
    }

    proptest! {
        #[test]
        fn frame_roundtrip_property(
            w in 1usize..24,
            h in 1usize..24,
            n in prop::sample::select(vec![2usize, 4, 8, 16]),
            seed in any::<u64>(),
        ) {
            let mut rng = SplitMix64::new(seed);
            let frame = random_frame(&mut rng, w, h);
            let bs = encode_frame(&frame, n).unwrap();
            let decoded = decode_frame(&FrameBitstream::from_bytes(&bs.to_bytes()).unwrap()).unwrap();
            prop_assert_eq!(decoded, frame);
        }
    }
}
