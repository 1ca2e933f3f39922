use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::model::{Root, RootKind};
use super::tabular::{StateSpec, TabularMdp};
use super::MdpError;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RootEntry {
    kind: RootKind,
    state: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    action: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MdpFile {
    gamma: f64,
    #[serde(default = "default_root")]
    root: RootEntry,
    states: Vec<StateSpec>,
}

fn default_root() -> RootEntry {
    RootEntry {
        kind: RootKind::Max,
        state: 0,
        action: None,
    }
}

impl TryFrom<MdpFile> for TabularMdp {
    type Error = MdpError;

    fn try_from(file: MdpFile) -> Result<Self, MdpError> {
        let root = match (file.root.kind, file.root.action) {
            (RootKind::Max, None) => Root::Max(file.root.state),
            (RootKind::Max, Some(_)) => {
                return Err(MdpError::Root("a max root takes no action".into()))
            }
            (RootKind::Avg, Some(a)) => Root::Avg(file.root.state, a),
            (RootKind::Avg, None) => {
                return Err(MdpError::Root("an avg root needs an action".into()))
            }
        };
        TabularMdp::new(file.gamma, root, file.states)
    }
}

impl From<&TabularMdp> for MdpFile {
    fn from(mdp: &TabularMdp) -> Self {
        let root = match *mdp.root_node() {
            Root::Max(state) => RootEntry {
                kind: RootKind::Max,
                state,
                action: None,
            },
            Root::Avg(state, a) => RootEntry {
                kind: RootKind::Avg,
                state,
                action: Some(a),
            },
        };
        MdpFile {
            gamma: mdp.gamma(),
            root,
            states: mdp.states().to_vec(),
        }
    }
}

/// Parses and validates an MDP from its JSON text.
pub fn parse_mdp(text: &str) -> Result<TabularMdp, MdpError> {
    let file: MdpFile = serde_json::from_str(text)?;
    file.try_into()
}

pub fn load_mdp(path: impl AsRef<Path>) -> Result<TabularMdp, MdpError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| MdpError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_mdp(&text)
}

pub fn to_json(mdp: &TabularMdp) -> String {
    serde_json::to_string_pretty(&MdpFile::from(mdp)).expect("MDP serialization cannot fail")
}

pub fn write_mdp(mdp: &TabularMdp, path: impl AsRef<Path>) -> Result<(), MdpError> {
    let path = path.as_ref();
    fs::write(path, to_json(mdp)).map_err(|source| MdpError::Io {
        path: path.to_path_buf(),
        source,
    })
}
