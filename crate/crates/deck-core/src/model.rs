//! In-memory model of a presentation.
//!
//! A loaded deck keeps two layers side by side: the modeled elements
//! (top-level text boxes, placeholders, and pictures) and the raw bytes of
//! everything else. Each slide is stored as an alternating sequence of
//! verbatim byte chunks and element slots, so a slide that is never mutated
//! serializes back byte-identically, and a mutated slide only regenerates
//! the XML of the shapes that actually changed.

use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

use crate::error::{DeckError, Result};

/// EMU (English Metric Units) per inch, the native OOXML geometry unit.
pub const EMU_PER_INCH: i64 = 914_400;
/// EMU per pixel at the 96-DPI screen convention.
pub const EMU_PER_PIXEL: i64 = EMU_PER_INCH / 96;

/// Stable identifier of a modeled element, unique within its slide.
///
/// Assigned in document order at load time: `s{slide}-t{n}` for text
/// elements and `s{slide}-i{n}` for images. Ids never change for the
/// lifetime of the process; elements added later continue the counters.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ElementId(String);

impl ElementId {
    pub fn new(id: impl Into<String>) -> Self {
        ElementId(id.into())
    }

    pub fn text(prefix: &str, n: u32) -> Self {
        ElementId(format!("{prefix}-t{n}"))
    }

    pub fn image(prefix: &str, n: u32) -> Self {
        ElementId(format!("{prefix}-i{n}"))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ElementId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ElementId {
    fn from(s: &str) -> Self {
        ElementId(s.to_string())
    }
}

/// Shape geometry in EMU. `w` and `h` are always positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub x: i64,
    pub y: i64,
    pub w: i64,
    pub h: i64,
}

impl BoundingBox {
    pub fn new(x: i64, y: i64, w: i64, h: i64) -> Self {
        BoundingBox { x, y, w, h }
    }

    /// Clamp into the model invariants: x, y >= 0 and w, h >= 1.
    pub fn clamped(self) -> Self {
        BoundingBox {
            x: self.x.max(0),
            y: self.y.max(0),
            w: self.w.max(1),
            h: self.h.max(1),
        }
    }

    /// True when the two boxes agree within `tol` EMU on every edge.
    pub fn approx_eq(&self, other: &BoundingBox, tol: i64) -> bool {
        (self.x - other.x).abs() <= tol
            && (self.y - other.y).abs() <= tol
            && (self.w - other.w).abs() <= tol
            && (self.h - other.h).abs() <= tol
    }
}

/// Character formatting. `None` fields inherit from the theme/layout.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FontSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub size_pt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bold: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub italic: Option<bool>,
    /// Six uppercase hex digits, e.g. `FF0000`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub color_rgb: Option<String>,
}

impl FontSpec {
    pub fn is_inherit(&self) -> bool {
        self.name.is_none()
            && self.size_pt.is_none()
            && self.bold.is_none()
            && self.italic.is_none()
            && self.color_rgb.is_none()
    }

    /// Enforce the model invariants: size clamped into [1, 400] points,
    /// color uppercased and dropped unless it is six hex digits.
    pub fn normalized(mut self) -> Self {
        self.size_pt = self
            .size_pt
            .filter(|s| s.is_finite())
            .map(|s| s.clamp(1.0, 400.0));
        self.color_rgb = self.color_rgb.and_then(|c| {
            let upper = c.to_ascii_uppercase();
            (upper.len() == 6 && upper.bytes().all(|b| b.is_ascii_hexdigit())).then_some(upper)
        });
        self
    }
}

/// One formatted run of text. Paragraph breaks are encoded as `\n`
/// characters at the end of the run that closes the paragraph, so the
/// concatenation of all run texts is the element's extractable text.
#[derive(Debug, Clone, PartialEq)]
pub struct TextRun {
    pub text: String,
    pub font: FontSpec,
}

/// Split `text` into the canonical run representation produced by a
/// serialize/parse round trip: one run per line, with the terminating
/// newline kept on the run.
pub fn runs_from_text(text: &str, font: &FontSpec) -> Vec<TextRun> {
    let lines: Vec<&str> = text.split('\n').collect();
    let last = lines.len() - 1;
    lines
        .iter()
        .enumerate()
        .map(|(i, line)| TextRun {
            text: if i < last {
                format!("{line}\n")
            } else {
                (*line).to_string()
            },
            font: font.clone(),
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct TextElement {
    pub id: ElementId,
    pub runs: Vec<TextRun>,
    pub bounds: BoundingBox,
    /// True when the shape is a title or centered-title placeholder.
    pub is_title: bool,
    /// Original shape XML; `None` once the element has been mutated and
    /// must be regenerated on save.
    pub(crate) raw: Option<Vec<u8>>,
    /// Numeric shape id (`p:cNvPr/@id`) used when regenerating XML.
    pub(crate) shape_id: u32,
}

impl TextElement {
    /// The element's extractable text: all runs concatenated.
    pub fn text(&self) -> String {
        self.runs.iter().map(|r| r.text.as_str()).collect()
    }

    /// Font of the first run (the one `replace_text` preserves).
    pub fn first_font(&self) -> FontSpec {
        self.runs.first().map(|r| r.font.clone()).unwrap_or_default()
    }
}

#[derive(Debug, Clone)]
pub struct ImageElement {
    pub id: ElementId,
    /// Archive path of the image part, e.g. `ppt/media/image1.png`.
    pub media_path: String,
    pub bounds: BoundingBox,
    pub content_type: String,
    pub(crate) rel_id: String,
    pub(crate) raw: Option<Vec<u8>>,
    pub(crate) shape_id: u32,
}

#[derive(Debug, Clone)]
pub(crate) enum ElementRecord {
    Text(TextElement),
    Image(ImageElement),
}

/// A slide part is stored as verbatim byte chunks interleaved with slots
/// for the modeled elements. Chunk order is document order.
#[derive(Debug, Clone)]
pub(crate) enum Chunk {
    Static(Vec<u8>),
    Element(u32),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Relationship {
    pub id: String,
    pub rtype: String,
    pub target: String,
}

#[derive(Debug, Clone)]
pub struct Slide {
    pub(crate) index: usize,
    /// Archive path of the slide part; `None` for slides created in memory
    /// (a fresh path is assigned on save).
    pub(crate) part_path: Option<String>,
    pub(crate) chunks: Vec<Chunk>,
    pub(crate) elements: HashMap<u32, ElementRecord>,
    pub(crate) rels: Vec<Relationship>,
    pub(crate) rels_raw: Option<Vec<u8>>,
    pub(crate) rels_dirty: bool,
    pub(crate) layout_ref: Option<String>,
    pub(crate) id_prefix: String,
    pub(crate) next_key: u32,
    pub(crate) next_text_n: u32,
    pub(crate) next_image_n: u32,
    pub(crate) next_shape_id: u32,
    pub(crate) next_rel_n: u32,
}

impl Slide {
    pub fn index(&self) -> usize {
        self.index
    }

    /// Archive path of the slide part as loaded, if any.
    pub fn part_path(&self) -> Option<&str> {
        self.part_path.as_deref()
    }

    /// Identifier of the slide-layout part this slide references.
    pub fn layout_ref(&self) -> Option<&str> {
        self.layout_ref.as_deref()
    }

    /// Modeled text elements in document order.
    pub fn texts(&self) -> Vec<&TextElement> {
        self.chunks
            .iter()
            .filter_map(|c| match c {
                Chunk::Element(k) => match self.elements.get(k) {
                    Some(ElementRecord::Text(t)) => Some(t),
                    _ => None,
                },
                Chunk::Static(_) => None,
            })
            .collect()
    }

    /// Modeled image elements in document order.
    pub fn images(&self) -> Vec<&ImageElement> {
        self.chunks
            .iter()
            .filter_map(|c| match c {
                Chunk::Element(k) => match self.elements.get(k) {
                    Some(ElementRecord::Image(i)) => Some(i),
                    _ => None,
                },
                Chunk::Static(_) => None,
            })
            .collect()
    }

    pub fn find_text(&self, id: &ElementId) -> Option<&TextElement> {
        self.texts().into_iter().find(|t| &t.id == id)
    }

    pub fn find_image(&self, id: &ElementId) -> Option<&ImageElement> {
        self.images().into_iter().find(|i| &i.id == id)
    }

    pub fn has_element(&self, id: &ElementId) -> bool {
        self.find_text(id).is_some() || self.find_image(id).is_some()
    }

    fn key_of(&self, id: &ElementId) -> Option<(u32, bool)> {
        self.elements.iter().find_map(|(k, rec)| match rec {
            ElementRecord::Text(t) if &t.id == id => Some((*k, true)),
            ElementRecord::Image(i) if &i.id == id => Some((*k, false)),
            _ => None,
        })
    }

    /// Remove a text element. Surviving elements keep their ids.
    pub fn remove_text(&mut self, id: &ElementId) -> Result<()> {
        match self.key_of(id) {
            Some((k, true)) => {
                self.elements.remove(&k);
                self.chunks.retain(|c| !matches!(c, Chunk::Element(key) if *key == k));
                Ok(())
            }
            _ => Err(DeckError::UnknownElement(id.clone())),
        }
    }

    /// Swap the full text of an element, preserving the first run's font
    /// and collapsing the content to the canonical single-font run form.
    pub fn replace_text(&mut self, id: &ElementId, new_text: &str) -> Result<()> {
        match self.key_of(id) {
            Some((k, true)) => {
                if let Some(ElementRecord::Text(t)) = self.elements.get_mut(&k) {
                    let font = t.first_font();
                    t.runs = runs_from_text(new_text, &font);
                    t.raw = None;
                }
                Ok(())
            }
            _ => Err(DeckError::UnknownElement(id.clone())),
        }
    }

    /// Append a new text box; returns the id assigned under the slide's
    /// id scheme.
    pub fn add_text_box(&mut self, text: &str, bounds: BoundingBox, font: FontSpec) -> ElementId {
        let id = ElementId::text(&self.id_prefix, self.next_text_n);
        self.next_text_n += 1;
        let font = font.normalized();
        let element = TextElement {
            id: id.clone(),
            runs: runs_from_text(text, &font),
            bounds: bounds.clamped(),
            is_title: false,
            raw: None,
            shape_id: self.take_shape_id(),
        };
        self.insert_element(ElementRecord::Text(element));
        id
    }

    /// Remove an image element; returns the media path it referenced so the
    /// deck can garbage-collect the part if nothing else uses it.
    pub fn remove_image(&mut self, id: &ElementId) -> Result<String> {
        match self.key_of(id) {
            Some((k, false)) => {
                let rec = self.elements.remove(&k);
                self.chunks.retain(|c| !matches!(c, Chunk::Element(key) if *key == k));
                let img = match rec {
                    Some(ElementRecord::Image(i)) => i,
                    _ => unreachable!("key_of said image"),
                };
                self.rels.retain(|r| r.id != img.rel_id);
                self.rels_dirty = true;
                Ok(img.media_path)
            }
            _ => Err(DeckError::UnknownElement(id.clone())),
        }
    }

    /// Point an existing image element at a different media part, keeping
    /// its bounds. Returns the media path previously referenced.
    pub fn replace_image(
        &mut self,
        id: &ElementId,
        media_path: String,
        content_type: String,
    ) -> Result<String> {
        match self.key_of(id) {
            Some((k, false)) => {
                let target = rel_target_for_media(&media_path);
                if let Some(ElementRecord::Image(img)) = self.elements.get_mut(&k) {
                    let old = std::mem::replace(&mut img.media_path, media_path);
                    img.content_type = content_type;
                    img.raw = None;
                    if let Some(rel) = self.rels.iter_mut().find(|r| r.id == img.rel_id) {
                        rel.target = target;
                    }
                    self.rels_dirty = true;
                    Ok(old)
                } else {
                    unreachable!("key_of said image")
                }
            }
            _ => Err(DeckError::UnknownElement(id.clone())),
        }
    }

    /// Append a new image element referencing `media_path`.
    pub fn add_image(
        &mut self,
        media_path: String,
        content_type: String,
        bounds: BoundingBox,
    ) -> ElementId {
        let id = ElementId::image(&self.id_prefix, self.next_image_n);
        self.next_image_n += 1;
        let rel_id = format!("rId{}", self.next_rel_n);
        self.next_rel_n += 1;
        self.rels.push(Relationship {
            id: rel_id.clone(),
            rtype: crate::parse::REL_TYPE_IMAGE.to_string(),
            target: rel_target_for_media(&media_path),
        });
        self.rels_dirty = true;
        let element = ImageElement {
            id: id.clone(),
            media_path,
            bounds: bounds.clamped(),
            content_type,
            rel_id,
            raw: None,
            shape_id: self.take_shape_id(),
        };
        self.insert_element(ElementRecord::Image(element));
        id
    }

    fn take_shape_id(&mut self) -> u32 {
        let id = self.next_shape_id;
        self.next_shape_id += 1;
        id
    }

    fn insert_element(&mut self, rec: ElementRecord) {
        let key = self.next_key;
        self.next_key += 1;
        self.elements.insert(key, rec);
        // New shapes go just before the closing chunk of the shape tree.
        let pos = self.chunks.len().saturating_sub(1);
        self.chunks.insert(pos, Chunk::Element(key));
    }
}

pub(crate) fn rel_target_for_media(media_path: &str) -> String {
    match media_path.strip_prefix("ppt/") {
        Some(rest) => format!("../{rest}"),
        None => media_path.to_string(),
    }
}

#[derive(Debug, Clone)]
pub(crate) struct PresEntry {
    pub sld_id: u32,
    pub rel_id: String,
    pub part_path: String,
}

#[derive(Debug, Clone)]
pub(crate) struct PresentationPart {
    pub raw: Vec<u8>,
    /// Byte range of the whole `p:sldIdLst` element in `raw`.
    pub sld_id_lst_range: std::ops::Range<usize>,
    pub entries: Vec<PresEntry>,
}

#[derive(Debug, Clone)]
pub(crate) struct RelsPart {
    pub raw: Vec<u8>,
    pub rels: Vec<Relationship>,
}

#[derive(Debug, Clone)]
pub(crate) struct ContentTypesPart {
    pub raw: Vec<u8>,
    pub defaults: Vec<(String, String)>,
    pub overrides: Vec<(String, String)>,
}

#[derive(Debug, Clone)]
pub(crate) struct NewMedia {
    pub bytes: Vec<u8>,
    pub content_type: String,
}

/// A loaded presentation: modeled slides plus every other archive entry
/// held verbatim.
#[derive(Debug, Clone)]
pub struct DeckDocument {
    pub(crate) slides: Vec<Slide>,
    pub(crate) opaque: BTreeMap<String, Vec<u8>>,
    pub(crate) media_new: BTreeMap<String, NewMedia>,
    pub(crate) presentation: PresentationPart,
    pub(crate) pres_rels: RelsPart,
    pub(crate) content_types: ContentTypesPart,
    /// Media parts that were referenced by modeled slides at load time;
    /// only these (plus session-added media) are eligible for orphan
    /// collection on save.
    pub(crate) media_owned: HashSet<String>,
    pub(crate) next_slide_num: u32,
    pub(crate) next_media_num: u32,
}

impl DeckDocument {
    pub fn slide_count(&self) -> usize {
        self.slides.len()
    }

    pub fn slides(&self) -> &[Slide] {
        &self.slides
    }

    pub fn slide(&self, index: usize) -> Result<&Slide> {
        self.slides.get(index).ok_or(DeckError::SlideIndexOutOfRange {
            index,
            count: self.slides.len(),
        })
    }

    pub fn slide_mut(&mut self, index: usize) -> Result<&mut Slide> {
        let count = self.slides.len();
        self.slides
            .get_mut(index)
            .ok_or(DeckError::SlideIndexOutOfRange { index, count })
    }

    /// Archive paths of the slide parts, aligned with `slides()`.
    pub fn slide_order(&self) -> Vec<Option<String>> {
        self.slides.iter().map(|s| s.part_path.clone()).collect()
    }

    /// All archive entries that are not modeled, keyed by path.
    pub fn opaque_parts(&self) -> &BTreeMap<String, Vec<u8>> {
        &self.opaque
    }

    /// Bytes of a media part, whether loaded or added this session.
    pub fn media_bytes(&self, path: &str) -> Option<&[u8]> {
        if let Some(m) = self.media_new.get(path) {
            return Some(&m.bytes);
        }
        self.opaque.get(path).map(|v| v.as_slice())
    }

    /// Store image bytes as a new media part, returning its archive path.
    /// Identical bytes added twice share one part.
    pub fn add_media(&mut self, bytes: Vec<u8>, content_type: &str) -> String {
        let ext = match content_type {
            "image/png" => "png",
            "image/jpeg" => "jpeg",
            "image/gif" => "gif",
            _ => "bin",
        };
        if let Some((path, _)) = self
            .media_new
            .iter()
            .find(|(_, m)| m.content_type == content_type && m.bytes == bytes)
        {
            return path.clone();
        }
        let path = format!("ppt/media/image{}.{}", self.next_media_num, ext);
        self.next_media_num += 1;
        self.media_owned.insert(path.clone());
        self.media_new.insert(
            path.clone(),
            NewMedia {
                bytes,
                content_type: content_type.to_string(),
            },
        );
        path
    }

    /// Clone of the slide at `index`, suitable for the output of a KEEP or
    /// MODIFY mapping.
    pub fn clone_slide(&self, index: usize) -> Result<Slide> {
        Ok(self.slide(index)?.clone())
    }

    /// Fresh slide with no modeled elements, referencing `layout_ref` (the
    /// usual choice is the layout of a neighbouring slide). `id_prefix`
    /// scopes the ids of elements later added to it.
    pub fn new_slide(&self, layout_ref: Option<String>, id_prefix: &str) -> Slide {
        crate::xmlgen::empty_slide(layout_ref, id_prefix)
    }

    /// Replace the slide list (the output of plan execution). Indices are
    /// renumbered to 0..M-1 in the given order.
    pub fn restructure(&mut self, slides: Vec<Slide>) {
        self.slides = slides;
        for (i, s) in self.slides.iter_mut().enumerate() {
            s.index = i;
        }
    }

    pub fn extract_slide_text(&self, index: usize) -> Result<Vec<(ElementId, String)>> {
        let slide = self.slide(index)?;
        Ok(slide
            .texts()
            .into_iter()
            .map(|t| (t.id.clone(), t.text()))
            .collect())
    }

    pub fn list_slide_images(&self, index: usize) -> Result<Vec<(ElementId, String, BoundingBox)>> {
        let slide = self.slide(index)?;
        Ok(slide
            .images()
            .into_iter()
            .map(|i| (i.id.clone(), i.content_type.clone(), i.bounds))
            .collect())
    }

    /// Deterministic per-slide digest of the deck, the prompt-side
    /// representation handed to the planning stages.
    pub fn summary(&self) -> DeckSummary {
        let entries = self
            .slides
            .iter()
            .map(|s| {
                let texts = s.texts();
                let title_guess = texts
                    .iter()
                    .find(|t| t.is_title)
                    .or_else(|| texts.first())
                    .map(|t| t.text().lines().next().unwrap_or("").to_string())
                    .unwrap_or_default();
                let full_text = texts
                    .iter()
                    .map(|t| t.text())
                    .collect::<Vec<_>>()
                    .join("\n");
                SlideSummary {
                    index: s.index,
                    title_guess,
                    full_text,
                    image_count: s.images().len(),
                    image_descriptions: Vec::new(),
                }
            })
            .collect::<Vec<_>>();
        DeckSummary {
            slide_count: entries.len(),
            entries,
        }
    }

    /// Comparable view of the modeled content (ids, texts, fonts, boxes,
    /// image content types and bytes). Two decks with equal models are
    /// interchangeable as far as the pipeline is concerned.
    pub fn model(&self) -> DeckModel {
        DeckModel {
            slides: self
                .slides
                .iter()
                .map(|s| SlideModel {
                    layout_ref: s.layout_ref.clone(),
                    texts: s
                        .texts()
                        .into_iter()
                        .map(|t| TextModel {
                            id: t.id.clone(),
                            runs: t.runs.iter().map(|r| (r.text.clone(), r.font.clone())).collect(),
                            bounds: t.bounds,
                            is_title: t.is_title,
                        })
                        .collect(),
                    images: s
                        .images()
                        .into_iter()
                        .map(|i| ImageModel {
                            id: i.id.clone(),
                            content_type: i.content_type.clone(),
                            bounds: i.bounds,
                            media_hash: self.media_bytes(&i.media_path).map(hash_bytes),
                        })
                        .collect(),
                })
                .collect(),
        }
    }
}

/// Per-slide prompt-side representation of a deck.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeckSummary {
    pub slide_count: usize,
    pub entries: Vec<SlideSummary>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlideSummary {
    pub index: usize,
    pub title_guess: String,
    pub full_text: String,
    pub image_count: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub image_descriptions: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeckModel {
    pub slides: Vec<SlideModel>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlideModel {
    pub layout_ref: Option<String>,
    pub texts: Vec<TextModel>,
    pub images: Vec<ImageModel>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TextModel {
    pub id: ElementId,
    pub runs: Vec<(String, FontSpec)>,
    pub bounds: BoundingBox,
    pub is_title: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImageModel {
    pub id: ElementId,
    pub content_type: String,
    pub bounds: BoundingBox,
    pub media_hash: Option<u64>,
}

fn hash_bytes(bytes: &[u8]) -> u64 {
    let mut h = DefaultHasher::new();
    bytes.hash(&mut h);
    h.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn runs_from_text_keeps_newlines_on_closing_runs() {
        let font = FontSpec::default();
        let runs = runs_from_text("a\n\nb", &font);
        let texts: Vec<&str> = runs.iter().map(|r| r.text.as_str()).collect();
        assert_eq!(texts, vec!["a\n", "\n", "b"]);
        let joined: String = texts.concat();
        assert_eq!(joined, "a\n\nb");
    }

    #[test]
    fn runs_from_text_empty_is_single_empty_run() {
        let runs = runs_from_text("", &FontSpec::default());
        assert_eq!(runs.len(), 1);
        assert_eq!(runs[0].text, "");
    }

    #[test]
    fn bounding_box_clamps_to_invariants() {
        let b = BoundingBox::new(-5, -1, 0, -3).clamped();
        assert_eq!(b, BoundingBox::new(0, 0, 1, 1));
    }
}
