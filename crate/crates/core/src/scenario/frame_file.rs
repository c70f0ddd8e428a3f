//! `PDRSFRM1` frame dump format.
//!
//! Little-endian throughout:
//!
//! ```text
//! magic   8 bytes  "PDRSFRM1"
//! u32     M, N, L, l, D, K
//! f64     sigma2
//! Y_R (M×l), Y (M×L), Y_D (M×D), P (N×L), R (N×l)
//!         row-major, each entry (re, im) as two f64
//! u32 × K active indices
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{ActivityPattern, PdrsCodebook, PdrsMode, PilotPool, ReceivedFrame};
use crate::error::{Error, Result};
use crate::numerics::{CMatrix, Complex64};

pub const FRAME_MAGIC: &[u8; 8] = b"PDRSFRM1";

const HEADER_LEN: usize = 8 + 6 * 4 + 8;

/// Observables plus pool, codebook and ground truth, as stored on disk.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameFile {
    pub frame: ReceivedFrame,
    pub pool: PilotPool,
    pub codebook: PdrsCodebook,
}

fn dim_u32(v: usize, name: &str) -> Result<u32> {
    u32::try_from(v).map_err(|_| Error::InvalidArgument(format!("{name} = {v} does not fit in u32")))
}

fn put_matrix(out: &mut Vec<u8>, m: &CMatrix) {
    for z in m.as_slice() {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
}

pub fn write_frame_to<W: Write>(
    mut w: W,
    frame: &ReceivedFrame,
    pool: &PilotPool,
    codebook: &PdrsCodebook,
) -> Result<()> {
    let (m, l_pilot) = frame.y.shape();
    let n = pool.size();
    let l = frame.y_r.cols();
    let d = frame.y_d.cols();
    let k = frame.ground_truth.count();
    if frame.y_r.rows() != m
        || frame.y_d.rows() != m
        || pool.pilot_len() != l_pilot
        || codebook.matrix().shape() != (n, l)
        || frame.ground_truth.pool_size() != n
    {
        return Err(Error::InvalidArgument("frame, pool and codebook dimensions disagree".into()));
    }

    let mut buf = Vec::with_capacity(HEADER_LEN + 16 * (m * (l + l_pilot + d) + n * (l_pilot + l)) + 4 * k);
    buf.extend_from_slice(FRAME_MAGIC);
    for (v, name) in [(m, "M"), (n, "N"), (l_pilot, "L"), (l, "l"), (d, "D"), (k, "K")] {
        buf.extend_from_slice(&dim_u32(v, name)?.to_le_bytes());
    }
    buf.extend_from_slice(&frame.sigma2.to_le_bytes());
    put_matrix(&mut buf, &frame.y_r);
    put_matrix(&mut buf, &frame.y);
    put_matrix(&mut buf, &frame.y_d);
    put_matrix(&mut buf, pool.matrix());
    put_matrix(&mut buf, codebook.matrix());
    for &i in frame.ground_truth.active() {
        buf.extend_from_slice(&dim_u32(i, "active index")?.to_le_bytes());
    }
    w.write_all(&buf)?;
    w.flush()?;
    Ok(())
}

pub fn write_frame(
    path: impl AsRef<Path>,
    frame: &ReceivedFrame,
    pool: &PilotPool,
    codebook: &PdrsCodebook,
) -> Result<()> {
    let f = File::create(path)?;
    write_frame_to(BufWriter::new(f), frame, pool, codebook)
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn take<const W: usize>(&mut self) -> [u8; W] {
        let mut out = [0u8; W];
        out.copy_from_slice(&self.buf[self.pos..self.pos + W]);
        self.pos += W;
        out
    }

    fn u32(&mut self) -> usize {
        u32::from_le_bytes(self.take()) as usize
    }

    fn f64(&mut self) -> f64 {
        f64::from_le_bytes(self.take())
    }

    fn matrix(&mut self, rows: usize, cols: usize) -> CMatrix {
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows * cols {
            let re = self.f64();
            let im = self.f64();
            data.push(Complex64::new(re, im));
        }
        CMatrix::from_vec(rows, cols, data).expect("length computed from dims")
    }
}

fn infer_mode(r: &CMatrix) -> PdrsMode {
    let amp = (r.cols() as f64).sqrt();
    let one_hot = (0..r.rows()).all(|i| {
        let row = r.row(i);
        let nz: Vec<_> = row.iter().filter(|z| z.norm_sqr() != 0.0).collect();
        nz.len() == 1 && nz[0].im == 0.0 && (nz[0].re - amp).abs() <= 1e-12 * amp
    });
    if one_hot {
        PdrsMode::OrthogonalReuse
    } else {
        PdrsMode::Gaussian
    }
}

pub fn read_frame_from<R: Read>(mut r: R) -> Result<FrameFile> {
    let mut buf = Vec::new();
    r.read_to_end(&mut buf)?;
    if buf.len() < HEADER_LEN {
        return Err(Error::Format(format!("{} bytes is shorter than the header", buf.len())));
    }
    if &buf[..8] != FRAME_MAGIC {
        return Err(Error::Format("bad magic, expected PDRSFRM1".into()));
    }
    let mut cur = Cursor { buf: &buf, pos: 8 };
    let (m, n, l_pilot, l, d, k) = (cur.u32(), cur.u32(), cur.u32(), cur.u32(), cur.u32(), cur.u32());
    let sigma2 = cur.f64();

    let entries = [m * l, m * l_pilot, m * d, n * l_pilot, n * l]
        .iter()
        .try_fold(0usize, |acc, &x| acc.checked_add(x))
        .ok_or_else(|| Error::Format("dimensions overflow".into()))?;
    let expected = entries
        .checked_mul(16)
        .and_then(|x| x.checked_add(HEADER_LEN))
        .and_then(|x| x.checked_add(4 * k))
        .ok_or_else(|| Error::Format("dimensions overflow".into()))?;
    if buf.len() != expected {
        return Err(Error::Format(format!(
            "length {} does not match {} implied by header (M={m} N={n} L={l_pilot} l={l} D={d} K={k})",
            buf.len(),
            expected
        )));
    }
    if !(sigma2.is_finite() && sigma2 >= 0.0) {
        return Err(Error::Format(format!("sigma2 = {sigma2} is not a noise power")));
    }

    let y_r = cur.matrix(m, l);
    let y = cur.matrix(m, l_pilot);
    let y_d = cur.matrix(m, d);
    let p = cur.matrix(n, l_pilot);
    let r = cur.matrix(n, l);
    let active: Vec<usize> = (0..k).map(|_| cur.u32()).collect();
    let ground_truth = ActivityPattern::new(n, active).map_err(|e| Error::Format(e.to_string()))?;
    if ground_truth.count() != k {
        return Err(Error::Format("active index list has duplicates".into()));
    }

    let mode = infer_mode(&r);
    Ok(FrameFile {
        frame: ReceivedFrame {
            y_r,
            y,
            y_d,
            sigma2,
            ground_truth,
            truth: None,
        },
        pool: PilotPool { p },
        codebook: PdrsCodebook { r, mode },
    })
}

pub fn read_frame(path: impl AsRef<Path>) -> Result<FrameFile> {
    let f = File::open(path)?;
    read_frame_from(BufReader::new(f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::RngStream;
    use crate::scenario::{assemble_frame, gen_pdrs_codebook, gen_pilot_pool, sample_activity, SystemConfig};

    fn sample() -> (ReceivedFrame, PilotPool, PdrsCodebook) {
        let mut cfg = SystemConfig::small(4, 9, 3, 2);
        cfg.snr_db = 10.0;
        cfg.data_len = 5;
        let mut rng = RngStream::new(77, 0);
        let pool = gen_pilot_pool(&cfg, &mut rng).unwrap();
        let cb = gen_pdrs_codebook(&cfg, &mut rng).unwrap();
        let act = sample_activity(&cfg, &mut rng).unwrap();
        let f = assemble_frame(&cfg, &pool, &cb, &act, &mut rng).unwrap();
        (f, pool, cb)
    }

    #[test]
    fn round_trip_preserves_observables() {
        let (f, pool, cb) = sample();
        let mut buf = Vec::new();
        write_frame_to(&mut buf, &f, &pool, &cb).unwrap();
        assert_eq!(&buf[..8], FRAME_MAGIC);
        // M=4 N=9 L=3 l=2 D=5 K=2
        assert_eq!(buf.len(), 40 + 16 * (4 * 2 + 4 * 3 + 4 * 5 + 9 * 3 + 9 * 2) + 8);
        let back = read_frame_from(buf.as_slice()).unwrap();
        assert_eq!(back.frame.y, f.y);
        assert_eq!(back.frame.y_r, f.y_r);
        assert_eq!(back.frame.y_d, f.y_d);
        assert_eq!(back.frame.sigma2, f.sigma2);
        assert_eq!(back.frame.ground_truth, f.ground_truth);
        assert_eq!(back.pool, pool);
        assert_eq!(back.codebook.matrix(), cb.matrix());
        assert!(back.frame.truth.is_none());
    }

    #[test]
    fn rejects_bad_magic_and_length() {
        let (f, pool, cb) = sample();
        let mut buf = Vec::new();
        write_frame_to(&mut buf, &f, &pool, &cb).unwrap();

        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(matches!(read_frame_from(bad.as_slice()), Err(Error::Format(_))));

        let short = &buf[..buf.len() - 1];
        assert!(matches!(read_frame_from(short), Err(Error::Format(_))));

        let mut long = buf.clone();
        long.push(0);
        assert!(matches!(read_frame_from(long.as_slice()), Err(Error::Format(_))));

        assert!(matches!(read_frame_from(&buf[..10]), Err(Error::Format(_))));
    }
}
