use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, ValueEnum};
use fsskit::encoding::Encoded;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Binary,
    JsonHex,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Self::Binary => "bin",
            Self::JsonHex => "json",
        }
    }
}

/// Output of a command that writes several files.
#[derive(Args, Debug)]
pub struct DirOutput {
    /// Directory receiving one file per party.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Binary)]
    pub format: Format,
}

/// Output of a command that produces one object.
#[derive(Args, Debug)]
pub struct FileOutput {
    /// File to write; hex (binary format) or JSON goes to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Binary)]
    pub format: Format,
}

fn render(encoded: &Encoded, magic: &str, format: Format) -> Vec<u8> {
    match format {
        Format::Binary => encoded.to_bytes(),
        Format::JsonHex => encoded.to_json_hex(magic).into_bytes(),
    }
}

impl DirOutput {
    /// Writes `<out>/<stem>-<i>.<ext>` for each item and prints the paths.
    pub fn write_all(&self, stem: &str, magic: &str, items: &[(u16, Encoded)]) -> Result<()> {
        fs::create_dir_all(&self.out).with_context(|| format!("creating {}", self.out.display()))?;
        for (i, encoded) in items {
            let path = self.out.join(format!("{stem}-{i}.{}", self.format.extension()));
            fs::write(&path, render(encoded, magic, self.format))
                .with_context(|| format!("writing {}", path.display()))?;
            println!("{}", path.display());
        }
        Ok(())
    }
}

impl FileOutput {
    pub fn write(&self, magic: &str, encoded: &Encoded) -> Result<()> {
        let bytes = render(encoded, magic, self.format);
        match &self.out {
            Some(path) => fs::write(path, bytes).with_context(|| format!("writing {}", path.display())),
            None => {
                match self.format {
                    Format::Binary => println!("{}", hex::encode(bytes)),
                    Format::JsonHex => println!("{}", String::from_utf8(bytes).expect("json is utf-8")),
                }
                Ok(())
            }
        }
    }
}

/// Reads a binary or JSON-hex file and returns its binary form.
pub fn read_object(path: &Path) -> Result<Vec<u8>> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    if bytes.first() == Some(&b'{') {
        let text = std::str::from_utf8(&bytes).with_context(|| format!("{} is not utf-8", path.display()))?;
        Ok(Encoded::json_hex_to_bytes(text).with_context(|| format!("parsing {}", path.display()))?)
    } else {
        Ok(bytes)
    }
}

pub fn parse_seed(s: &str) -> std::result::Result<[u8; 32], String> {
    hex::decode(s)
        .ok()
        .and_then(|b| <[u8; 32]>::try_from(b).ok())
        .ok_or_else(|| "expected 64 hex digits (32 bytes)".to_string())
}
