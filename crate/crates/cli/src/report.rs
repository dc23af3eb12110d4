use serde_json::{Map, Value};

/// Ordered report document; rendered as indented key-value text or JSON.
#[derive(Debug, Default)]
pub struct Report(Map<String, Value>);

impl Report {
    pub fn new(command: &str) -> Self {
        let mut m = Map::new();
        m.insert("command".into(), Value::String(command.into()));
        Report(m)
    }

    pub fn set(&mut self, key: &str, v: impl Into<Value>) {
        self.0.insert(key.into(), v.into());
    }

    pub fn render(&self, json: bool) -> String {
        if json {
            let mut s = serde_json::to_string_pretty(&Value::Object(self.0.clone())).expect("serializable");
            s.push('\n');
            s
        } else {
            let mut out = String::new();
            write_object(&self.0, 0, &mut out);
            out
        }
    }
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("-".into()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        _ => None,
    }
}

fn write_object(m: &Map<String, Value>, indent: usize, out: &mut String) {
    let pad = " ".repeat(indent);
    for (k, v) in m {
        if let Some(s) = scalar(v) {
            out.push_str(&format!("{pad}{k}: {s}\n"));
            continue;
        }
        if let Value::Array(items) = v {
            let flat = items.iter().map(scalar).collect::<Option<Vec<_>>>();
            if let Some(flat) = flat.filter(|f| f.iter().all(|x| !x.contains(' '))) {
                out.push_str(&format!("{pad}{k}: [{}]\n", flat.join(", ")));
                continue;
            }
        }
        out.push_str(&format!("{pad}{k}:\n"));
        write_value(v, indent + 2, out);
    }
}

fn write_value(v: &Value, indent: usize, out: &mut String) {
    match v {
        Value::Object(m) => write_object(m, indent, out),
        Value::Array(items) => {
            let pad = " ".repeat(indent);
            for item in items {
                let mut inner = String::new();
                match scalar(item) {
                    Some(s) => inner.push_str(&format!("{pad}  {s}\n")),
                    None => write_value(item, indent + 2, &mut inner),
                }
                // Mark the first line of each item with a dash.
                out.push_str(&pad);
                out.push_str("- ");
                out.push_str(&inner[indent + 2..]);
            }
        }
        other => out.push_str(&format!("{}{}\n", " ".repeat(indent), scalar(other).unwrap_or_default())),
    }
}
