use alloc::string::{String, ToString};

use serde_json::{json, Map, Value};

use super::AssessmentResult;

/// Serializes an assessment in the shape the prompt asks models to emit.
/// Extracting and validating the output reproduces the assessment.
pub fn render_assessment_json(result: &AssessmentResult) -> String {
    let mut map = Map::new();
    for d in &result.dimensions {
        map.insert(
            d.dimension.key().into(),
            json!({
                "score": d.score,
                "keywords": d.keywords,
                "evidence": d.evidence,
            }),
        );
    }
    map.insert("total".into(), json!(result.total));
    Value::Object(map).to_string()
}
