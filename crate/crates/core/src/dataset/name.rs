//! Sample names of the form `S1-P2-M-14-1-N`.
//!
//! Fields, in order: session, subject, gender, age in years, image index
//! within the session, expression.

use std::fmt;
use std::str::FromStr;

use super::{Expression, Gender, SampleMeta};

pub const SESSIONS: std::ops::RangeInclusive<u8> = 1..=2;
pub const IMAGE_INDICES: std::ops::RangeInclusive<u8> = 1..=7;
pub const AGES: std::ops::RangeInclusive<u32> = 8..=78;

/// The field of a sample name that failed to parse.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NameField {
    FieldCount,
    Session,
    Subject,
    Gender,
    Age,
    ImageIndex,
    Expression,
}

impl fmt::Display for NameField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            NameField::FieldCount => "field count",
            NameField::Session => "session",
            NameField::Subject => "subject",
            NameField::Gender => "gender",
            NameField::Age => "age",
            NameField::ImageIndex => "image index",
            NameField::Expression => "expression",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed sample name {name:?}: bad {field} ({token:?})")]
pub struct NameError {
    pub name: String,
    pub field: NameField,
    pub token: String,
}

/// Parses a sample name such as `S2-P100-F-36-2-S`.
pub fn parse_sample_name(name: &str) -> Result<SampleMeta, NameError> {
    let err = |field: NameField, token: &str| NameError {
        name: name.to_string(),
        field,
        token: token.to_string(),
    };

    let parts: Vec<&str> = name.split('-').collect();
    if parts.len() != 6 {
        return Err(err(NameField::FieldCount, &parts.len().to_string()));
    }

    let session = prefixed_int::<u8>(parts[0], 'S')
        .filter(|s| SESSIONS.contains(s))
        .ok_or_else(|| err(NameField::Session, parts[0]))?;
    let subject = prefixed_int::<u32>(parts[1], 'P')
        .filter(|&p| p >= 1)
        .ok_or_else(|| err(NameField::Subject, parts[1]))?;
    let gender = match parts[2] {
        "M" => Gender::Male,
        "F" => Gender::Female,
        other => return Err(err(NameField::Gender, other)),
    };
    let age_years = plain_int::<u32>(parts[3])
        .filter(|a| AGES.contains(a))
        .ok_or_else(|| err(NameField::Age, parts[3]))?;
    let image_index = plain_int::<u8>(parts[4])
        .filter(|i| IMAGE_INDICES.contains(i))
        .ok_or_else(|| err(NameField::ImageIndex, parts[4]))?;
    let expression = match parts[5] {
        "N" => Expression::Normal,
        "S" => Expression::Smile,
        other => return Err(err(NameField::Expression, other)),
    };

    Ok(SampleMeta {
        session,
        subject,
        gender,
        age_years,
        image_index,
        expression,
    })
}

/// Inverse of [`parse_sample_name`].
pub fn format_sample_name(meta: &SampleMeta) -> String {
    format!(
        "S{}-P{}-{}-{}-{}-{}",
        meta.session,
        meta.subject,
        match meta.gender {
            Gender::Male => 'M',
            Gender::Female => 'F',
        },
        meta.age_years,
        meta.image_index,
        match meta.expression {
            Expression::Normal => 'N',
            Expression::Smile => 'S',
        }
    )
}

// Digits only: rejects signs, whitespace and leading zeros so that
// formatting a parsed name gives back the same string.
fn plain_int<T: FromStr>(token: &str) -> Option<T> {
    let canonical = !token.is_empty()
        && token.bytes().all(|b| b.is_ascii_digit())
        && (token == "0" || !token.starts_with('0'));
    if canonical {
        token.parse().ok()
    } else {
        None
    }
}

fn prefixed_int<T: FromStr>(token: &str, prefix: char) -> Option<T> {
    token.strip_prefix(prefix).and_then(plain_int)
}

impl FromStr for SampleMeta {
    type Err = NameError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_sample_name(s)
    }
}

impl fmt::Display for SampleMeta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_sample_name(self))
    }
}
