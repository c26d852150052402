use std::fs;
use std::path::Path;

use super::{Label, OpcodeSequence};
use crate::{Error, Result};

/// Extracts mnemonics from `objdump -d` style text.
///
/// Instruction lines look like `  401000:\t55\tpush   %rbp`. The mnemonic is
/// the first whitespace token of the third tab-separated field, lowercased.
/// Everything else (section headers, `<symbol>:` labels, byte-continuation
/// lines, blanks) is skipped.
pub fn parse_disassembly(text: &str) -> Vec<String> {
    text.lines().filter_map(instruction_mnemonic).collect()
}

fn instruction_mnemonic(line: &str) -> Option<String> {
    let mut fields = line.split('\t');
    let addr = fields.next()?.trim();
    let addr = addr.strip_suffix(':')?;
    if addr.is_empty() || !addr.chars().all(|c| c.is_ascii_hexdigit()) {
        return None;
    }
    let bytes = fields.next()?.trim();
    if bytes.is_empty() || !bytes.split_whitespace().all(|b| b.len() == 2 && b.chars().all(|c| c.is_ascii_hexdigit())) {
        return None;
    }
    let mnemonic = fields.next()?.split_whitespace().next()?;
    Some(mnemonic.to_ascii_lowercase())
}

fn to_sequence(file_id: &str, label: Label, text: &str) -> Result<OpcodeSequence> {
    let opcodes = parse_disassembly(text);
    if opcodes.is_empty() {
        return Err(Error::EmptyFile(file_id.to_string()));
    }
    Ok(OpcodeSequence {
        file_id: file_id.to_string(),
        label,
        opcodes,
    })
}

/// Parsed corpus plus the ids of files that had no instructions.
#[derive(Debug, Clone, Default)]
pub struct LoadedCorpus {
    pub sequences: Vec<OpcodeSequence>,
    pub discarded: Vec<String>,
}

impl LoadedCorpus {
    fn push(&mut self, result: Result<OpcodeSequence>) -> Result<()> {
        match result {
            Ok(seq) => self.sequences.push(seq),
            Err(Error::EmptyFile(id)) => self.discarded.push(id),
            Err(e) => return Err(e),
        }
        Ok(())
    }
}

/// Reads every `*.asm` file in `dir` (sorted by name); labels come from the
/// `mal_` / `ben_` filename prefix.
pub fn load_corpus_dir(dir: &Path) -> Result<LoadedCorpus> {
    let mut paths: Vec<_> = fs::read_dir(dir)
        .map_err(Error::at(dir))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "asm"))
        .collect();
    paths.sort();

    let mut corpus = LoadedCorpus::default();
    for path in paths {
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string();
        let label = if stem.starts_with(Label::Malicious.file_prefix()) {
            Label::Malicious
        } else if stem.starts_with(Label::Benign.file_prefix()) {
            Label::Benign
        } else {
            return Err(Error::data(format!(
                "{}: filename must start with `mal_` or `ben_`",
                path.display()
            )));
        };
        let text = fs::read_to_string(&path).map_err(Error::at(&path))?;
        corpus.push(to_sequence(&stem, label, &text))?;
    }
    if corpus.sequences.is_empty() && corpus.discarded.is_empty() {
        return Err(Error::data(format!("no .asm files found in {}", dir.display())));
    }
    Ok(corpus)
}

/// Reads a `file_id,label,path` manifest (with header). Relative paths are
/// resolved against the manifest's directory.
pub fn load_manifest(manifest: &Path) -> Result<LoadedCorpus> {
    let base = manifest.parent().unwrap_or(Path::new("."));
    let mut reader = csv::Reader::from_path(manifest)?;
    let mut corpus = LoadedCorpus::default();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() != 3 {
            return Err(Error::data(format!(
                "{} line {}: expected `file_id,label,path`",
                manifest.display(),
                line + 2
            )));
        }
        let label: Label = record[1].parse()?;
        let path = base.join(&record[2]);
        let text = fs::read_to_string(&path).map_err(Error::at(&path))?;
        corpus.push(to_sequence(&record[0], label, &text))?;
    }
    if corpus.sequences.is_empty() && corpus.discarded.is_empty() {
        return Err(Error::data(format!("{} lists no files", manifest.display())));
    }
    Ok(corpus)
}

/// Renders `opcodes` as a minimal `objdump -d` listing that
/// [`parse_disassembly`] reads back unchanged.
pub fn render_disassembly(file_id: &str, opcodes: &[String]) -> String {
    let mut out = format!("\n{file_id}.exe:     file format pei-i386\n\n\nDisassembly of section .text:\n\n00401000 <.text>:\n");
    let mut addr = 0x401000usize;
    for op in opcodes {
        let byte = op.bytes().fold(0u8, |h, b| h.wrapping_mul(31).wrapping_add(b));
        out.push_str(&format!("  {addr:x}:\t{byte:02x}                   \t{op}\n"));
        addr += 1;
    }
    out
}

/// Writes one `<file_id>.asm` per sequence plus `manifest.csv` into `dir`.
/// Returns the manifest path.
pub fn write_corpus(sequences: &[OpcodeSequence], dir: &Path) -> Result<std::path::PathBuf> {
    fs::create_dir_all(dir).map_err(Error::at(dir))?;
    let manifest = dir.join("manifest.csv");
    let mut w = csv::Writer::from_path(&manifest)?;
    w.write_record(["file_id", "label", "path"])?;
    for seq in sequences {
        let name = format!("{}.asm", seq.file_id);
        let path = dir.join(&name);
        fs::write(&path, render_disassembly(&seq.file_id, &seq.opcodes)).map_err(Error::at(&path))?;
        w.write_record([seq.file_id.as_str(), &seq.label.as_u8().to_string(), &name])?;
    }
    w.flush().map_err(Error::at(&manifest))?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rendered_listing_round_trips() {
        let ops: Vec<String> = ["push", "mov", "call", "ret"].iter().map(|s| s.to_string()).collect();
        assert_eq!(parse_disassembly(&render_disassembly("x", &ops)), ops);
    }

    #[test]
    fn written_corpus_loads_back() {
        let dir = tempfile::tempdir().unwrap();
        let seqs = vec![
            OpcodeSequence { file_id: "ben_0".into(), label: Label::Benign, opcodes: vec!["nop".into()] },
            OpcodeSequence { file_id: "mal_0".into(), label: Label::Malicious, opcodes: vec!["xor".into(), "ret".into()] },
        ];
        let manifest = write_corpus(&seqs, dir.path()).unwrap();
        assert_eq!(load_manifest(&manifest).unwrap().sequences, seqs);
        assert_eq!(load_corpus_dir(dir.path()).unwrap().sequences, seqs);
    }

    #[test]
    fn single_instruction_line() {
        assert_eq!(parse_disassembly("401000:\t55\tpush %rbp"), vec!["push"]);
    }

    #[test]
    fn skips_labels_headers_and_continuations() {
        let text = "\nfoo.exe:     file format pei-i386\n\n\
                    Disassembly of section .text:\n\n\
                    00401000 <_start>:\n\
                    \x20 401000:\t55                   \tPUSH   %ebp\n\
                    00401001 <next>:\n\
                    \x20 401001:\t89 e5                \tmov    %esp,%ebp\n\
                    \x20 401003:\t8d b4 26 00 00 00 00 \tlea    0x0(%esi,%eiz,1),%esi\n\
                    \x20 40100a:\t00 \n\
                    \x20 40100b:\tf3 ab                \trep stos %eax,%es:(%edi)\n";
        assert_eq!(parse_disassembly(text), vec!["push", "mov", "lea", "rep"]);
    }

    #[test]
    fn header_only_file_is_empty() {
        let err = to_sequence("x", Label::Benign, "a.out: file format elf64\n").unwrap_err();
        assert!(matches!(err, Error::EmptyFile(id) if id == "x"));
    }

    #[test]
    fn loads_directory_with_prefix_labels() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("mal_a.asm"), "1:\t90\tnop\n2:\tc3\tret\n").unwrap();
        fs::write(dir.path().join("ben_b.asm"), "1:\t55\tpush %rbp\n").unwrap();
        fs::write(dir.path().join("ben_empty.asm"), "nothing here\n").unwrap();
        fs::write(dir.path().join("notes.txt"), "ignored").unwrap();
        let corpus = load_corpus_dir(dir.path()).unwrap();
        assert_eq!(corpus.sequences.len(), 2);
        assert_eq!(corpus.sequences[0].file_id, "ben_b");
        assert_eq!(corpus.sequences[1].label, Label::Malicious);
        assert_eq!(corpus.discarded, vec!["ben_empty".to_string()]);
    }

    #[test]
    fn manifest_resolves_relative_paths() {
        let dir = tempfile::tempdir().unwrap();
        fs::create_dir(dir.path().join("files")).unwrap();
        fs::write(dir.path().join("files/x.asm"), "1:\t90\tnop\n").unwrap();
        fs::write(dir.path().join("m.csv"), "file_id,label,path\nx,malicious,files/x.asm\n").unwrap();
        let corpus = load_manifest(&dir.path().join("m.csv")).unwrap();
        assert_eq!(corpus.sequences[0].opcodes, vec!["nop"]);
        assert_eq!(corpus.sequences[0].label, Label::Malicious);
    }

    #[test]
    fn empty_directory_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        assert!(load_corpus_dir(dir.path()).is_err());
    }
}
