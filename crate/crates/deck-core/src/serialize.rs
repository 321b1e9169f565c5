//! PPTX writing.
//!
//! Untouched parts are emitted byte-identical to the loaded archive. A
//! mutated slide is re-assembled from its chunk sequence, so only the
//! shapes that actually changed get regenerated XML. The presentation
//! part, its relationships, and `[Content_Types].xml` are rewritten only
//! when the slide set itself changed.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::Write;

use crate::error::{DeckError, Result};
use crate::model::{Chunk, DeckDocument, ElementRecord, Relationship};
use crate::parse::{
    slide_rels_path, CONTENT_TYPES_PATH, PRESENTATION_PATH, PRESENTATION_RELS_PATH,
    REL_TYPE_SLIDE,
};
use crate::xmlgen;

const SLIDE_CONTENT_TYPE: &str =
    "application/vnd.openxmlformats-officedocument.presentationml.slide+xml";

/// Serialize the deck back to archive bytes.
pub fn save_deck(deck: &DeckDocument) -> Result<Vec<u8>> {
    let slide_paths = assign_slide_paths(deck);
    let original_paths: Vec<&str> = deck
        .presentation
        .entries
        .iter()
        .map(|e| e.part_path.as_str())
        .collect();
    let structure_changed =
        slide_paths.iter().map(String::as_str).ne(original_paths.iter().copied());

    let mut entries: BTreeMap<String, Vec<u8>> = BTreeMap::new();

    // Slide parts and their relationship parts.
    for (slide, path) in deck.slides.iter().zip(&slide_paths) {
        entries.insert(path.clone(), slide_xml_bytes(deck, slide, path)?);
        let rels_bytes = if slide.rels_dirty {
            if slide.rels.is_empty() {
                None
            } else {
                Some(xmlgen::rels_xml(&slide.rels))
            }
        } else {
            slide.rels_raw.clone()
        };
        if let Some(bytes) = rels_bytes {
            entries.insert(slide_rels_path(path), bytes);
        }
    }

    // Presentation part and its relationships.
    if structure_changed {
        let (pres_bytes, rels) = rebuild_presentation(deck, &slide_paths);
        entries.insert(PRESENTATION_PATH.to_string(), pres_bytes);
        entries.insert(PRESENTATION_RELS_PATH.to_string(), xmlgen::rels_xml(&rels));
    } else {
        entries.insert(PRESENTATION_PATH.to_string(), deck.presentation.raw.clone());
        entries.insert(PRESENTATION_RELS_PATH.to_string(), deck.pres_rels.raw.clone());
    }

    // Media: keep everything except parts this session owned and orphaned.
    let orphaned = orphaned_media(deck);
    for (path, bytes) in &deck.opaque {
        if !orphaned.contains(path) {
            entries.insert(path.clone(), bytes.clone());
        }
    }
    for (path, media) in &deck.media_new {
        if !orphaned.contains(path) {
            entries.insert(path.clone(), media.bytes.clone());
        }
    }

    entries.insert(
        CONTENT_TYPES_PATH.to_string(),
        content_types_bytes(deck, &slide_paths, &entries),
    );

    write_zip(&entries)
}

/// Output archive path per slide, in order. A part path is kept on its
/// first occurrence; clones and fresh slides get new numbered parts.
fn assign_slide_paths(deck: &DeckDocument) -> Vec<String> {
    let mut seen: HashSet<&str> = HashSet::new();
    let mut next = deck.next_slide_num;
    deck.slides
        .iter()
        .map(|slide| match slide.part_path.as_deref() {
            Some(p) if seen.insert(p) => p.to_string(),
            _ => {
                let path = format!("ppt/slides/slide{next}.xml");
                next += 1;
                path
            }
        })
        .collect()
}

fn slide_xml_bytes(
    deck: &DeckDocument,
    slide: &crate::model::Slide,
    path: &str,
) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    for chunk in &slide.chunks {
        match chunk {
            Chunk::Static(bytes) => out.extend_from_slice(bytes),
            Chunk::Element(key) => {
                let rec = slide.elements.get(key).ok_or_else(|| {
                    DeckError::SerializationError(format!(
                        "{path}: dangling element slot {key}"
                    ))
                })?;
                match rec {
                    ElementRecord::Text(t) => match &t.raw {
                        Some(raw) => out.extend_from_slice(raw),
                        None => out.extend_from_slice(&xmlgen::text_shape_xml(t)),
                    },
                    ElementRecord::Image(i) => match &i.raw {
                        Some(raw) => out.extend_from_slice(raw),
                        None => {
                            let _ = deck.media_bytes(&i.media_path).ok_or_else(|| {
                                DeckError::SerializationError(format!(
                                    "{path}: image {} references missing media {}",
                                    i.id, i.media_path
                                ))
                            })?;
                            out.extend_from_slice(&xmlgen::pic_shape_xml(i));
                        }
                    },
                }
            }
        }
    }
    Ok(out)
}

fn rebuild_presentation(
    deck: &DeckDocument,
    slide_paths: &[String],
) -> (Vec<u8>, Vec<Relationship>) {
    let mut by_path: HashMap<&str, (u32, &str)> = deck
        .presentation
        .entries
        .iter()
        .map(|e| (e.part_path.as_str(), (e.sld_id, e.rel_id.as_str())))
        .collect();

    let mut next_sld_id = deck
        .presentation
        .entries
        .iter()
        .map(|e| e.sld_id)
        .max()
        .unwrap_or(255)
        .max(255)
        + 1;
    let mut next_rel_n = deck
        .pres_rels
        .rels
        .iter()
        .filter_map(|r| r.id.strip_prefix("rId").and_then(|n| n.parse::<u32>().ok()))
        .max()
        .unwrap_or(0)
        + 1;

    let mut lst_entries: Vec<(u32, String)> = Vec::with_capacity(slide_paths.len());
    let mut fresh_rels: Vec<Relationship> = Vec::new();
    let mut kept_rel_ids: HashSet<String> = HashSet::new();
    for path in slide_paths {
        match by_path.remove(path.as_str()) {
            Some((sld_id, rel_id)) => {
                lst_entries.push((sld_id, rel_id.to_string()));
                kept_rel_ids.insert(rel_id.to_string());
            }
            None => {
                let rel_id = format!("rId{next_rel_n}");
                next_rel_n += 1;
                lst_entries.push((next_sld_id, rel_id.clone()));
                next_sld_id += 1;
                fresh_rels.push(Relationship {
                    id: rel_id,
                    rtype: REL_TYPE_SLIDE.to_string(),
                    target: path.strip_prefix("ppt/").unwrap_or(path).to_string(),
                });
            }
        }
    }

    // Keep every non-slide relationship and the slide relationships that
    // survived; dropped slides lose theirs.
    let mut rels: Vec<Relationship> = deck
        .pres_rels
        .rels
        .iter()
        .filter(|r| r.rtype != REL_TYPE_SLIDE || kept_rel_ids.contains(&r.id))
        .cloned()
        .collect();
    rels.extend(fresh_rels);

    let range = deck.presentation.sld_id_lst_range.clone();
    let mut pres = Vec::with_capacity(deck.presentation.raw.len());
    pres.extend_from_slice(&deck.presentation.raw[..range.start]);
    pres.extend_from_slice(xmlgen::sld_id_lst_xml(&lst_entries).as_bytes());
    pres.extend_from_slice(&deck.presentation.raw[range.end..]);
    (pres, rels)
}

/// Media parts this session owned that no slide references any more and
/// no opaque relationship part mentions.
fn orphaned_media(deck: &DeckDocument) -> HashSet<String> {
    let mut referenced: HashSet<String> = HashSet::new();
    for slide in &deck.slides {
        for img in slide.images() {
            referenced.insert(img.media_path.clone());
        }
    }
    deck.media_owned
        .iter()
        .filter(|path| !referenced.contains(*path))
        .filter(|path| {
            let needle = path.strip_prefix("ppt/").unwrap_or(path);
            !deck
                .opaque
                .iter()
                .filter(|(p, _)| p.contains("_rels/"))
                .any(|(_, bytes)| {
                    std::str::from_utf8(bytes)
                        .map(|s| s.contains(needle))
                        .unwrap_or(false)
                })
        })
        .cloned()
        .collect()
}

fn content_types_bytes(
    deck: &DeckDocument,
    slide_paths: &[String],
    entries: &BTreeMap<String, Vec<u8>>,
) -> Vec<u8> {
    let original_slide_parts: HashSet<String> = deck
        .presentation
        .entries
        .iter()
        .map(|e| format!("/{}", e.part_path))
        .collect();
    let current_slide_parts: HashSet<String> =
        slide_paths.iter().map(|p| format!("/{p}")).collect();

    let mut overrides: Vec<(String, String)> = deck
        .content_types
        .overrides
        .iter()
        .filter(|(part, _)| {
            !original_slide_parts.contains(part) || current_slide_parts.contains(part)
        })
        .cloned()
        .collect();
    let known: HashSet<&str> = overrides.iter().map(|(p, _)| p.as_str()).collect();
    let mut added: Vec<(String, String)> = current_slide_parts
        .iter()
        .filter(|p| !known.contains(p.as_str()))
        .map(|p| (p.clone(), SLIDE_CONTENT_TYPE.to_string()))
        .collect();
    added.sort();
    overrides.extend(added);

    let mut defaults = deck.content_types.defaults.clone();
    let have: HashSet<String> = defaults.iter().map(|(e, _)| e.to_ascii_lowercase()).collect();
    let mut needed: Vec<(String, String)> = entries
        .keys()
        .filter(|p| p.starts_with("ppt/media/"))
        .filter_map(|p| {
            let ext = p.rsplit('.').next()?.to_ascii_lowercase();
            let ct = match ext.as_str() {
                "png" => "image/png",
                "jpeg" | "jpg" => "image/jpeg",
                "gif" => "image/gif",
                _ => return None,
            };
            (!have.contains(&ext)).then(|| (ext, ct.to_string()))
        })
        .collect();
    needed.sort();
    needed.dedup();
    defaults.extend(needed);

    let unchanged =
        defaults == deck.content_types.defaults && overrides == deck.content_types.overrides;
    if unchanged && !deck.content_types.raw.is_empty() {
        deck.content_types.raw.clone()
    } else {
        xmlgen::content_types_xml(&defaults, &overrides)
    }
}

fn write_zip(entries: &BTreeMap<String, Vec<u8>>) -> Result<Vec<u8>> {
    let mut cursor = std::io::Cursor::new(Vec::new());
    let mut writer = zip::ZipWriter::new(&mut cursor);
    let options = zip::write::SimpleFileOptions::default()
        .compression_method(zip::CompressionMethod::Deflated)
        .last_modified_time(zip::DateTime::default());

    // Content types first, then everything else in sorted order, so the
    // same deck always produces the same bytes.
    let mut write_one = |name: &str, bytes: &[u8]| -> Result<()> {
        writer
            .start_file(name, options)
            .map_err(|e| DeckError::SerializationError(e.to_string()))?;
        writer
            .write_all(bytes)
            .map_err(|e| DeckError::SerializationError(e.to_string()))?;
        Ok(())
    };
    if let Some(ct) = entries.get(CONTENT_TYPES_PATH) {
        write_one(CONTENT_TYPES_PATH, ct)?;
    }
    for (name, bytes) in entries {
        if name != CONTENT_TYPES_PATH {
            write_one(name, bytes)?;
        }
    }
    writer
        .finish()
        .map_err(|e| DeckError::SerializationError(e.to_string()))?;
    Ok(cursor.into_inner())
}
