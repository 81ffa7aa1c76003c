//! Instruction prompts sent to the vision-language model.
//!
//! The templates are byte-exact constants; tests pin their digests so a
//! drive-by edit cannot silently change what goes over the wire.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PromptKind {
    Description,
    ZeroShot,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplate {
    pub kind: PromptKind,
    pub text: &'static str,
}

pub const DESCRIPTION_PROMPT: &str = "Describe in detail the emotional state of the person in the photo based on her/his facial expression. Provide straight sentences in your answer.";

pub const ZERO_SHOT_PROMPT: &str = "Describe in detail the emotional state of the person in the photo based on her/his facial expression. Provide straight sentences in your answers. Based on your description, classify the emotional state as either 'normal', 'anxiety', or 'depression'. The output must be exactly one of these words. Follow the template: Output: {result}";

pub fn build_prompt(kind: PromptKind) -> PromptTemplate {
    let text = match kind {
        PromptKind::Description => DESCRIPTION_PROMPT,
        PromptKind::ZeroShot => ZERO_SHOT_PROMPT,
    };
    PromptTemplate { kind, text }
}

#[cfg(test)]
mod tests {
    use super::*;
    use sha2::{Digest, Sha256};

    #[test]
    fn description_prompt_wording() {
        let prompt = build_prompt(PromptKind::Description);
        assert!(prompt
            .text
            .starts_with("Describe in detail the emotional state"));
        assert!(prompt.text.ends_with("in your answer."));
    }

    #[test]
    fn zero_shot_prompt_wording() {
        let prompt = build_prompt(PromptKind::ZeroShot);
        assert!(prompt
            .text
            .contains("The output must be exactly one of these words"));
        assert!(prompt.text.ends_with("Output: {result}"));
    }

    #[test]
    fn templates_are_byte_stable() {
        let digest = |text: &str| {
            let mut hasher = Sha256::new();
            hasher.update(text.as_bytes());
            format!("{:x}", hasher.finalize())
        };
        assert_eq!(
            digest(DESCRIPTION_PROMPT),
            "6464c2d0de177f16b10c304957df0a4ed88fe9c87e5002c4e4ebbb633dfdfa5e"
        );
        assert_eq!(
            digest(ZERO_SHOT_PROMPT),
            "86a3f847686c704dafa26c0775c1bd4c8f68bceea2a52e813fc847dc90115066"
        );
    }
}
