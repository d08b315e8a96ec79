use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::CliError;

/// Optional JSON defaults, one object per subcommand:
/// `{"encode": {"sq": [0.1, 1.0], "gof": 20}, "serve": {"port": 9000}}`.
#[derive(Debug, Default)]
pub struct ConfigFile(Map<String, Value>);

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        match serde_json::from_str(&text) {
            Ok(Value::Object(m)) => Ok(ConfigFile(m)),
            Ok(_) => Err(CliError::Usage(format!(
                "config {} must hold a JSON object",
                path.display()
            ))),
            Err(e) => Err(CliError::Usage(format!(
                "config {} is not valid JSON: {e}",
                path.display()
            ))),
        }
    }

    /// Overlays the flags that were given onto the `section` defaults.
    pub fn resolve<T: Serialize + DeserializeOwned>(
        &self,
        section: &str,
        flags: T,
    ) -> Result<T, CliError> {
        let mut merged = match self.0.get(section) {
            Some(Value::Object(m)) => m.clone(),
            Some(_) => {
                return Err(CliError::Usage(format!(
                    "config section {section:?} must be an object"
                )))
            }
            None => Map::new(),
        };
        let given = serde_json::to_value(flags).map_err(|e| CliError::Usage(e.to_string()))?;
        if let Value::Object(given) = given {
            for (k, v) in given {
                if !v.is_null() {
                    merged.insert(k, v);
                }
            }
        }
        serde_json::from_value(Value::Object(merged))
            .map_err(|e| CliError::Usage(format!("config section {section:?}: {e}")))
    }
}
