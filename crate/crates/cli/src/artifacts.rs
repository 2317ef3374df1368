//! Cache-directory artifact paths and stage-aware loading.

use std::path::{Path, PathBuf};

use icomp_core::cache;
use icomp_core::fastica::{IcaConfig, IcaResult};
use icomp_core::intrusion::{ConsistencyScore, SigmaOrder};
use icomp_core::{EmbeddingMatrix, HocMatrix, SpanningTree, WhiteningModel};

use crate::CmdError;

pub struct CacheDir {
    root: PathBuf,
}

impl CacheDir {
    pub fn new(root: &Path) -> Self {
        Self { root: root.to_path_buf() }
    }

    pub fn ensure(&self) -> Result<(), CmdError> {
        std::fs::create_dir_all(&self.root)
            .map_err(|e| CmdError::Data(format!("cannot create cache dir: {e}")))?;
        Ok(())
    }

    pub fn embedding_path(&self) -> PathBuf {
        self.root.join("embedding.bin")
    }
    pub fn whitening_path(&self) -> PathBuf {
        self.root.join("whitening.bin")
    }
    pub fn ica_path(&self) -> PathBuf {
        self.root.join("ica.bin")
    }
    pub fn hoc_path(&self) -> PathBuf {
        self.root.join("hoc.bin")
    }
    pub fn intrusion_path(&self) -> PathBuf {
        self.root.join("intrusion.bin")
    }
    pub fn tree_path(&self) -> PathBuf {
        self.root.join("mst.bin")
    }
    pub fn trials_path(&self) -> PathBuf {
        self.root.join("judge_trials.jsonl")
    }

    fn require(&self, path: &Path, producer: &str) -> Result<(), CmdError> {
        if !path.exists() {
            return Err(CmdError::Data(format!(
                "missing {}: run '{producer}' first",
                path.display()
            )));
        }
        Ok(())
    }

    pub fn load_embedding(&self) -> Result<EmbeddingMatrix, CmdError> {
        let path = self.embedding_path();
        self.require(&path, "ingest")?;
        Ok(cache::load_embedding(&path)?)
    }

    pub fn load_whitening(&self) -> Result<WhiteningModel, CmdError> {
        let path = self.whitening_path();
        self.require(&path, "whiten")?;
        Ok(cache::load_whitening(&path)?)
    }

    pub fn load_ica(&self) -> Result<(IcaResult, IcaConfig), CmdError> {
        let path = self.ica_path();
        self.require(&path, "ica")?;
        Ok(cache::load_ica(&path)?)
    }

    pub fn load_hoc(&self) -> Result<HocMatrix, CmdError> {
        let path = self.hoc_path();
        self.require(&path, "hoc")?;
        Ok(cache::load_hoc(&path)?)
    }

    pub fn load_intrusion(&self) -> Result<(Vec<ConsistencyScore>, SigmaOrder), CmdError> {
        let path = self.intrusion_path();
        self.require(&path, "intrusion")?;
        Ok(cache::load_intrusion(&path)?)
    }

    pub fn load_tree(&self) -> Result<SpanningTree, CmdError> {
        let path = self.tree_path();
        self.require(&path, "mst")?;
        Ok(cache::load_tree(&path)?)
    }

    pub fn load_trials(&self) -> Result<Vec<icomp_core::JudgeTrial>, CmdError> {
        let path = self.trials_path();
        self.require(&path, "judge-build")?;
        let file = std::fs::File::open(&path)
            .map_err(|e| CmdError::Data(format!("cannot open {}: {e}", path.display())))?;
        Ok(icomp_core::judge::read_trials(std::io::BufReader::new(file))?)
    }
}

/// Writes a text file, creating parent directories as needed.
pub fn write_text(path: &Path, contents: &str) -> Result<(), CmdError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)
            .map_err(|e| CmdError::Data(format!("cannot create {}: {e}", parent.display())))?;
    }
    std::fs::write(path, contents)
        .map_err(|e| CmdError::Data(format!("cannot write {}: {e}", path.display())))?;
    Ok(())
}
