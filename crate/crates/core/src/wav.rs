//! WAV file I/O. Samples are converted to `f64` at the boundary; writes go
//! through a temporary file in the destination directory and are renamed
//! into place, so a failed write never leaves a partial file.

use std::io::{BufReader, BufWriter};
use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use crate::buffer::AudioBuffer;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BitDepth {
    Pcm16,
    Float32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WavFile {
    pub bit_depth: BitDepth,
    pub audio: AudioBuffer,
}

impl WavFile {
    pub fn channels(&self) -> usize {
        self.audio.n_channels()
    }

    pub fn sample_rate(&self) -> u32 {
        self.audio.sample_rate()
    }
}

fn wav_err(path: &Path) -> impl FnOnce(hound::Error) -> Error + '_ {
    move |source| match source {
        hound::Error::IoError(e) => Error::Io { path: path.to_path_buf(), source: e },
        other => Error::Wav { path: path.to_path_buf(), source: other },
    }
}

pub fn read_wav(path: &Path) -> Result<WavFile> {
    let file = std::fs::File::open(path).map_err(|e| Error::Io { path: path.to_path_buf(), source: e })?;
    let reader = WavReader::new(BufReader::new(file)).map_err(wav_err(path))?;
    let spec = reader.spec();
    let channels = spec.channels as usize;
    let (bit_depth, data): (BitDepth, Vec<f64>) = match (spec.sample_format, spec.bits_per_sample) {
        (SampleFormat::Int, 16) => (
            BitDepth::Pcm16,
            reader
                .into_samples::<i16>()
                .map(|s| s.map(|v| v as f64 / 32768.0))
                .collect::<std::result::Result<_, _>>()
                .map_err(wav_err(path))?,
        ),
        (SampleFormat::Float, 32) => (
            BitDepth::Float32,
            reader
                .into_samples::<f32>()
                .map(|s| s.map(|v| v as f64))
                .collect::<std::result::Result<_, _>>()
                .map_err(wav_err(path))?,
        ),
        (fmt, bits) => {
            return Err(Error::UnsupportedFormat(format!(
                "{}: {bits}-bit {fmt:?} (supported: 16-bit PCM, 32-bit float)",
                path.display()
            )))
        }
    };
    let audio = AudioBuffer::from_interleaved(&data, channels, spec.sample_rate)?;
    Ok(WavFile { bit_depth, audio })
}

fn to_pcm16(x: f64) -> i16 {
    (x * 32768.0).round().clamp(-32768.0, 32767.0) as i16
}

/// Writes `audio` atomically.
pub fn write_wav(path: &Path, audio: &AudioBuffer, bit_depth: BitDepth) -> Result<()> {
    let io_err = |e: std::io::Error| Error::Io { path: path.to_path_buf(), source: e };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => std::path::PathBuf::from("."),
    };
    let tmp = tempfile::NamedTempFile::new_in(&dir).map_err(io_err)?;
    let spec = WavSpec {
        channels: audio.n_channels() as u16,
        sample_rate: audio.sample_rate(),
        bits_per_sample: match bit_depth {
            BitDepth::Pcm16 => 16,
            BitDepth::Float32 => 32,
        },
        sample_format: match bit_depth {
            BitDepth::Pcm16 => SampleFormat::Int,
            BitDepth::Float32 => SampleFormat::Float,
        },
    };
    {
        let mut writer = WavWriter::new(BufWriter::new(tmp.as_file()), spec).map_err(wav_err(path))?;
        for s in audio.to_interleaved() {
            match bit_depth {
                BitDepth::Pcm16 => writer.write_sample(to_pcm16(s)),
                BitDepth::Float32 => writer.write_sample(s as f32),
            }
            .map_err(wav_err(path))?;
        }
        writer.finalize().map_err(wav_err(path))?;
    }
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

/// Writes bytes atomically (temp file + rename).
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    use std::io::Write;
    let io_err = |e: std::io::Error| Error::Io { path: path.to_path_buf(), source: e };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => std::path::PathBuf::from("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(io_err)?;
    tmp.write_all(bytes).map_err(io_err)?;
    tmp.flush().map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn float_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.wav");
        let x: Vec<f64> = (0..100).map(|n| ((n as f32) * 0.013).sin() as f64).collect();
        let audio = AudioBuffer::stereo(x.clone(), x.iter().map(|v| -v).collect(), 44100).unwrap();
        write_wav(&path, &audio, BitDepth::Float32).unwrap();
        let back = read_wav(&path).unwrap();
        assert_eq!(back.bit_depth, BitDepth::Float32);
        assert_eq!(back.audio, audio);
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = read_wav(Path::new("/nonexistent/x.wav")).unwrap_err();
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn failed_write_leaves_nothing() {
        let dir = tempfile::tempdir().unwrap();
        // A directory cannot be replaced by the rename.
        let target = dir.path().join("sub");
        std::fs::create_dir(&target).unwrap();
        let audio = AudioBuffer::mono(vec![0.0; 10], 8000).unwrap();
        assert!(write_wav(&target, &audio, BitDepth::Pcm16).is_err());
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    proptest! {
        #[test]
        fn pcm16_round_trip_within_one_lsb(samples in proptest::collection::vec(-1.0f64..1.0, 1..200)) {
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("p.wav");
            let audio = AudioBuffer::mono(samples.clone(), 16000).unwrap();
            write_wav(&path, &audio, BitDepth::Pcm16).unwrap();
            let once = read_wav(&path).unwrap();
            for (a, b) in samples.iter().zip(once.audio.channel(0)) {
                prop_assert!((a - b).abs() <= 1.0 / 32768.0);
            }
            // Second pass is sample-identical.
            write_wav(&path, &once.audio, BitDepth::Pcm16).unwrap();
            prop_assert_eq!(read_wav(&path).unwrap(), once);
        }
    }
}
