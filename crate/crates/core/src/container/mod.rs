//! Seekable "RRFV" stream container.
//!
//! ```text
//! [header][frame record 0][frame record 1]...[seek index trailer]
//! ```
//!
//! All integers are little-endian, reals are `f32`. Every section carries
//! an explicit length. The trailer lists the byte offset of each group of
//! frames (GOF) and of each frame record; its own offset is patched into
//! the header once the last frame is written, so streams are produced in a
//! single pass.

mod header;
mod index;
mod manifest;
mod reader;
mod record;
mod source;
mod writer;

pub use self::header::{StreamHeader, STREAM_MAGIC, STREAM_VERSION};
pub use self::index::{gof_of, SeekIndex, INDEX_MAGIC};
pub use self::manifest::{Manifest, QualityLevel};
pub use self::reader::{read_frame_record, read_header, StreamReader};
pub use self::record::{FrameRecord, FrameSizes, FrameType};
pub use self::source::{ByteSource, FileSource, RecordingSource};
pub use self::writer::{write_stream, StreamWriter};
