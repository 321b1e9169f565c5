//! PPTX loading: ZIP extraction plus the slide-subset XML parser.
//!
//! Only top-level text-bearing shapes (`p:sp` with a `p:txBody`) and
//! pictures of supported media types are modeled; every other archive
//! entry and every other shape stays verbatim.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::{Cursor, Read};

use roxmltree::{Document, Node};

use crate::error::{DeckError, Result};
use crate::model::{
    BoundingBox, Chunk, ContentTypesPart, DeckDocument, ElementId, ElementRecord, FontSpec,
    ImageElement, PresEntry, PresentationPart, Relationship, RelsPart, Slide, TextElement,
    TextRun,
};

pub(crate) const NS_A: &str = "http://schemas.openxmlformats.org/drawingml/2006/main";
pub(crate) const NS_P: &str = "http://schemas.openxmlformats.org/presentationml/2006/main";
pub(crate) const NS_R: &str =
    "http://schemas.openxmlformats.org/officeDocument/2006/relationships";
pub(crate) const REL_TYPE_IMAGE: &str =
    "http://schemas.openxmlformats.org/officeDocument/2006/relationships/image";
pub(crate) const REL_TYPE_SLIDE: &str =
    "http://schemas.openxmlformats.org/officeDocument/2006/relationships/slide";
pub(crate) const REL_TYPE_LAYOUT: &str =
    "http://schemas.openxmlformats.org/officeDocument/2006/relationships/slideLayout";

pub(crate) const PRESENTATION_PATH: &str = "ppt/presentation.xml";
pub(crate) const PRESENTATION_RELS_PATH: &str = "ppt/_rels/presentation.xml.rels";
pub(crate) const CONTENT_TYPES_PATH: &str = "[Content_Types].xml";

/// Parse a presentation archive into the deck model.
pub fn load_deck(bytes: &[u8]) -> Result<DeckDocument> {
    let mut archive = zip::ZipArchive::new(Cursor::new(bytes))
        .map_err(|e| DeckError::NotZip(e.to_string()))?;

    let mut parts: BTreeMap<String, Vec<u8>> = BTreeMap::new();
    for i in 0..archive.len() {
        let mut entry = archive
            .by_index(i)
            .map_err(|e| DeckError::NotZip(e.to_string()))?;
        if entry.is_dir() {
            continue;
        }
        let mut content = Vec::with_capacity(entry.size() as usize);
        entry
            .read_to_end(&mut content)
            .map_err(|e| DeckError::NotZip(e.to_string()))?;
        parts.insert(entry.name().to_string(), content);
    }

    let pres_raw = parts
        .get(PRESENTATION_PATH)
        .ok_or(DeckError::MissingPresentationPart)?
        .clone();
    let pres_rels_raw = parts
        .get(PRESENTATION_RELS_PATH)
        .ok_or(DeckError::MissingPresentationPart)?
        .clone();

    let pres_rels = RelsPart {
        rels: parse_rels(&pres_rels_raw, PRESENTATION_RELS_PATH)?,
        raw: pres_rels_raw,
    };
    let rel_by_id: HashMap<&str, &Relationship> =
        pres_rels.rels.iter().map(|r| (r.id.as_str(), r)).collect();

    let presentation = parse_presentation(&pres_raw, &rel_by_id)?;
    if presentation.entries.is_empty() {
        return Err(DeckError::MalformedSlideXml {
            path: PRESENTATION_PATH.to_string(),
            detail: "slide id list is empty".to_string(),
        });
    }

    let ct_raw = parts.get(CONTENT_TYPES_PATH).cloned().unwrap_or_default();
    let content_types = parse_content_types(&ct_raw)?;

    let mut slides = Vec::with_capacity(presentation.entries.len());
    let mut slide_paths: HashSet<String> = HashSet::new();
    let mut media_owned: HashSet<String> = HashSet::new();
    for (index, entry) in presentation.entries.iter().enumerate() {
        let slide_raw = parts
            .get(&entry.part_path)
            .ok_or_else(|| DeckError::MalformedSlideXml {
                path: entry.part_path.clone(),
                detail: "slide part missing from archive".to_string(),
            })?;
        let rels_path = slide_rels_path(&entry.part_path);
        let (rels, rels_raw) = match parts.get(&rels_path) {
            Some(raw) => (parse_rels(raw, &rels_path)?, Some(raw.clone())),
            None => (Vec::new(), None),
        };
        let slide = parse_slide(index, &entry.part_path, slide_raw, rels, rels_raw, &parts)?;
        for img in slide.images() {
            media_owned.insert(img.media_path.clone());
        }
        slide_paths.insert(entry.part_path.clone());
        slide_paths.insert(rels_path);
        slides.push(slide);
    }

    let next_slide_num = parts
        .keys()
        .filter_map(|p| slide_part_number(p))
        .max()
        .unwrap_or(0)
        + 1;
    let next_media_num = parts
        .keys()
        .filter_map(|p| media_part_number(p))
        .max()
        .unwrap_or(0)
        + 1;

    let opaque: BTreeMap<String, Vec<u8>> = parts
        .into_iter()
        .filter(|(path, _)| {
            path != PRESENTATION_PATH
                && path != PRESENTATION_RELS_PATH
                && path != CONTENT_TYPES_PATH
                && !slide_paths.contains(path)
        })
        .collect();

    Ok(DeckDocument {
        slides,
        opaque,
        media_new: BTreeMap::new(),
        presentation,
        pres_rels,
        content_types,
        media_owned,
        next_slide_num,
        next_media_num,
    })
}

pub(crate) fn slide_rels_path(slide_path: &str) -> String {
    match slide_path.rsplit_once('/') {
        Some((dir, name)) => format!("{dir}/_rels/{name}.rels"),
        None => format!("_rels/{slide_path}.rels"),
    }
}

fn slide_part_number(path: &str) -> Option<u32> {
    path.strip_prefix("ppt/slides/slide")?
        .strip_suffix(".xml")?
        .parse()
        .ok()
}

fn media_part_number(path: &str) -> Option<u32> {
    let name = path.strip_prefix("ppt/media/image")?;
    let stem = name.split('.').next()?;
    stem.parse().ok()
}

/// Resolve a relationship target relative to the `ppt/<kind>/` directory of
/// the part that declares it.
pub(crate) fn resolve_target(base_dir: &str, target: &str) -> String {
    if target.starts_with('/') {
        return target.trim_start_matches('/').to_string();
    }
    let mut segments: Vec<&str> = base_dir.split('/').filter(|s| !s.is_empty()).collect();
    for seg in target.split('/') {
        match seg {
            ".." => {
                segments.pop();
            }
            "." | "" => {}
            s => segments.push(s),
        }
    }
    segments.join("/")
}

fn parse_rels(raw: &[u8], path: &str) -> Result<Vec<Relationship>> {
    let text = std::str::from_utf8(raw).map_err(|e| DeckError::MalformedSlideXml {
        path: path.to_string(),
        detail: e.to_string(),
    })?;
    let doc = Document::parse(text).map_err(|e| DeckError::MalformedSlideXml {
        path: path.to_string(),
        detail: e.to_string(),
    })?;
    let mut rels = Vec::new();
    for node in doc.root_element().children().filter(Node::is_element) {
        if node.tag_name().name() == "Relationship" {
            let (Some(id), Some(rtype), Some(target)) = (
                node.attribute("Id"),
                node.attribute("Type"),
                node.attribute("Target"),
            ) else {
                continue;
            };
            rels.push(Relationship {
                id: id.to_string(),
                rtype: rtype.to_string(),
                target: target.to_string(),
            });
        }
    }
    Ok(rels)
}

fn parse_presentation(
    raw: &[u8],
    rel_by_id: &HashMap<&str, &Relationship>,
) -> Result<PresentationPart> {
    let path = PRESENTATION_PATH;
    let text = std::str::from_utf8(raw).map_err(|e| DeckError::MalformedSlideXml {
        path: path.to_string(),
        detail: e.to_string(),
    })?;
    let doc = Document::parse(text).map_err(|e| DeckError::MalformedSlideXml {
        path: path.to_string(),
        detail: e.to_string(),
    })?;
    let sld_id_lst = doc
        .descendants()
        .find(|n| n.is_element() && n.tag_name() == (NS_P, "sldIdLst").into())
        .ok_or_else(|| DeckError::MalformedSlideXml {
            path: path.to_string(),
            detail: "no slide id list".to_string(),
        })?;

    let mut entries = Vec::new();
    for node in sld_id_lst.children().filter(Node::is_element) {
        if node.tag_name() != (NS_P, "sldId").into() {
            continue;
        }
        let sld_id: u32 = node
            .attribute("id")
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| DeckError::MalformedSlideXml {
                path: path.to_string(),
                detail: "slide id entry without numeric id".to_string(),
            })?;
        let rel_id = node.attribute((NS_R, "id")).ok_or_else(|| {
            DeckError::MalformedSlideXml {
                path: path.to_string(),
                detail: format!("slide id {sld_id} has no relationship id"),
            }
        })?;
        let rel = rel_by_id
            .get(rel_id)
            .ok_or_else(|| DeckError::MalformedSlideXml {
                path: path.to_string(),
                detail: format!("relationship {rel_id} not found in presentation rels"),
            })?;
        entries.push(PresEntry {
            sld_id,
            rel_id: rel_id.to_string(),
            part_path: resolve_target("ppt", &rel.target),
        });
    }

    Ok(PresentationPart {
        raw: raw.to_vec(),
        sld_id_lst_range: sld_id_lst.range(),
        entries,
    })
}

fn parse_content_types(raw: &[u8]) -> Result<ContentTypesPart> {
    let path = CONTENT_TYPES_PATH;
    let mut defaults = Vec::new();
    let mut overrides = Vec::new();
    if !raw.is_empty() {
        let text = std::str::from_utf8(raw).map_err(|e| DeckError::MalformedSlideXml {
            path: path.to_string(),
            detail: e.to_string(),
        })?;
        let doc = Document::parse(text).map_err(|e| DeckError::MalformedSlideXml {
            path: path.to_string(),
            detail: e.to_string(),
        })?;
        for node in doc.root_element().children().filter(Node::is_element) {
            match node.tag_name().name() {
                "Default" => {
                    if let (Some(ext), Some(ct)) =
                        (node.attribute("Extension"), node.attribute("ContentType"))
                    {
                        defaults.push((ext.to_string(), ct.to_string()));
                    }
                }
                "Override" => {
                    if let (Some(part), Some(ct)) =
                        (node.attribute("PartName"), node.attribute("ContentType"))
                    {
                        overrides.push((part.to_string(), ct.to_string()));
                    }
                }
                _ => {}
            }
        }
    }
    Ok(ContentTypesPart {
        raw: raw.to_vec(),
        defaults,
        overrides,
    })
}

pub(crate) fn content_type_for_media(path: &str, bytes: Option<&[u8]>) -> Option<String> {
    let ext = path.rsplit('.').next().unwrap_or("").to_ascii_lowercase();
    let by_ext = match ext.as_str() {
        "png" => Some("image/png"),
        "jpg" | "jpeg" => Some("image/jpeg"),
        "gif" => Some("image/gif"),
        _ => None,
    };
    if let Some(ct) = by_ext {
        return Some(ct.to_string());
    }
    bytes.and_then(sniff_image_type).map(str::to_string)
}

/// Detect PNG/JPEG/GIF from magic bytes; `None` for anything else.
pub fn sniff_image_type(bytes: &[u8]) -> Option<&'static str> {
    if bytes.starts_with(&[0x89, b'P', b'N', b'G']) {
        Some("image/png")
    } else if bytes.starts_with(&[0xFF, 0xD8, 0xFF]) {
        Some("image/jpeg")
    } else if bytes.starts_with(b"GIF87a") || bytes.starts_with(b"GIF89a") {
        Some("image/gif")
    } else {
        None
    }
}

fn parse_slide(
    index: usize,
    path: &str,
    raw: &[u8],
    rels: Vec<Relationship>,
    rels_raw: Option<Vec<u8>>,
    parts: &BTreeMap<String, Vec<u8>>,
) -> Result<Slide> {
    let text = std::str::from_utf8(raw).map_err(|e| DeckError::MalformedSlideXml {
        path: path.to_string(),
        detail: e.to_string(),
    })?;
    let doc = Document::parse(text).map_err(|e| DeckError::MalformedSlideXml {
        path: path.to_string(),
        detail: e.to_string(),
    })?;

    let sp_tree = doc
        .descendants()
        .find(|n| n.is_element() && n.tag_name() == (NS_P, "spTree").into())
        .ok_or_else(|| DeckError::MalformedSlideXml {
            path: path.to_string(),
            detail: "no shape tree".to_string(),
        })?;

    let rel_targets: HashMap<&str, &Relationship> =
        rels.iter().map(|r| (r.id.as_str(), r)).collect();
    let id_prefix = format!("s{index}");

    let mut chunks: Vec<Chunk> = Vec::new();
    let mut elements = HashMap::new();
    let mut cursor = 0usize;
    let mut next_key = 0u32;
    let mut text_n = 0u32;
    let mut image_n = 0u32;

    for shape in sp_tree.children().filter(Node::is_element) {
        let parsed = if shape.tag_name() == (NS_P, "sp").into() {
            parse_text_shape(&shape, &id_prefix, text_n).map(|mut t| {
                t.raw = Some(raw[shape.range()].to_vec());
                text_n += 1;
                ElementRecord::Text(t)
            })
        } else if shape.tag_name() == (NS_P, "pic").into() {
            parse_pic_shape(&shape, &id_prefix, image_n, &rel_targets, parts).map(|mut i| {
                i.raw = Some(raw[shape.range()].to_vec());
                image_n += 1;
                ElementRecord::Image(i)
            })
        } else {
            None
        };
        if let Some(rec) = parsed {
            let range = shape.range();
            if range.start > cursor {
                chunks.push(Chunk::Static(raw[cursor..range.start].to_vec()));
            }
            chunks.push(Chunk::Element(next_key));
            elements.insert(next_key, rec);
            next_key += 1;
            cursor = range.end;
        }
    }
    chunks.push(Chunk::Static(raw[cursor..].to_vec()));

    let next_shape_id = doc
        .descendants()
        .filter(|n| n.is_element() && n.tag_name() == (NS_P, "cNvPr").into())
        .filter_map(|n| n.attribute("id").and_then(|v| v.parse::<u32>().ok()))
        .max()
        .unwrap_or(1)
        + 1;
    let next_rel_n = rels
        .iter()
        .filter_map(|r| r.id.strip_prefix("rId").and_then(|n| n.parse::<u32>().ok()))
        .max()
        .unwrap_or(0)
        + 1;

    let layout_ref = rels
        .iter()
        .find(|r| r.rtype == REL_TYPE_LAYOUT)
        .map(|r| resolve_target("ppt/slides", &r.target));

    Ok(Slide {
        index,
        part_path: Some(path.to_string()),
        chunks,
        elements,
        rels,
        rels_raw,
        rels_dirty: false,
        layout_ref,
        id_prefix,
        next_key,
        next_text_n: text_n,
        next_image_n: image_n,
        next_shape_id,
        next_rel_n,
    })
}

fn find_child<'a>(node: &Node<'a, 'a>, ns: &str, name: &str) -> Option<Node<'a, 'a>> {
    node.children()
        .find(|n| n.is_element() && n.tag_name() == (ns, name).into())
}

fn parse_bounds(shape: &Node) -> BoundingBox {
    let xfrm = shape
        .descendants()
        .find(|n| n.is_element() && n.tag_name() == (NS_A, "xfrm").into());
    let attr_i64 = |n: &Node, name: &str| n.attribute(name).and_then(|v| v.parse::<i64>().ok());
    let (mut x, mut y, mut w, mut h) = (0, 0, EMU_DEFAULT, EMU_DEFAULT);
    if let Some(xfrm) = xfrm {
        if let Some(off) = find_child(&xfrm, NS_A, "off") {
            x = attr_i64(&off, "x").unwrap_or(0);
            y = attr_i64(&off, "y").unwrap_or(0);
        }
        if let Some(ext) = find_child(&xfrm, NS_A, "ext") {
            w = attr_i64(&ext, "cx").unwrap_or(EMU_DEFAULT);
            h = attr_i64(&ext, "cy").unwrap_or(EMU_DEFAULT);
        }
    }
    BoundingBox::new(x, y, w, h).clamped()
}

const EMU_DEFAULT: i64 = crate::model::EMU_PER_INCH;

fn parse_font(rpr: Option<Node>) -> FontSpec {
    let Some(rpr) = rpr else {
        return FontSpec::default();
    };
    let parse_flag = |v: &str| v == "1" || v == "true";
    FontSpec {
        name: find_child(&rpr, NS_A, "latin")
            .and_then(|n| n.attribute("typeface").map(str::to_string)),
        size_pt: rpr
            .attribute("sz")
            .and_then(|v| v.parse::<f64>().ok())
            .map(|v| v / 100.0),
        bold: rpr.attribute("b").map(parse_flag),
        italic: rpr.attribute("i").map(parse_flag),
        color_rgb: find_child(&rpr, NS_A, "solidFill")
            .and_then(|n| find_child(&n, NS_A, "srgbClr"))
            .and_then(|n| n.attribute("val").map(str::to_string)),
    }
    .normalized()
}

fn parse_text_shape(shape: &Node, id_prefix: &str, n: u32) -> Option<TextElement> {
    let tx_body = find_child(shape, NS_P, "txBody")?;

    let is_title = shape
        .descendants()
        .find(|d| d.is_element() && d.tag_name() == (NS_P, "ph").into())
        .and_then(|ph| ph.attribute("type"))
        .map(|t| t == "title" || t == "ctrTitle")
        .unwrap_or(false);

    let paragraphs: Vec<Node> = tx_body
        .children()
        .filter(|c| c.is_element() && c.tag_name() == (NS_A, "p").into())
        .collect();
    let mut runs: Vec<TextRun> = Vec::new();
    let push_newline = |runs: &mut Vec<TextRun>| match runs.last_mut() {
        Some(last) => last.text.push('\n'),
        None => runs.push(TextRun {
            text: "\n".to_string(),
            font: FontSpec::default(),
        }),
    };
    let para_count = paragraphs.len();
    for (pi, para) in paragraphs.iter().enumerate() {
        let mut para_had_runs = false;
        for child in para.children().filter(Node::is_element) {
            if child.tag_name() == (NS_A, "r").into() {
                let text = find_child(&child, NS_A, "t")
                    .map(|t| t.text().unwrap_or("").to_string())
                    .unwrap_or_default();
                let font = parse_font(find_child(&child, NS_A, "rPr"));
                runs.push(TextRun { text, font });
                para_had_runs = true;
            } else if child.tag_name() == (NS_A, "br").into() {
                if para_had_runs {
                    push_newline(&mut runs);
                } else {
                    runs.push(TextRun {
                        text: "\n".to_string(),
                        font: FontSpec::default(),
                    });
                    para_had_runs = true;
                }
            }
        }
        let is_last = pi + 1 == para_count;
        if !is_last {
            if para_had_runs {
                push_newline(&mut runs);
            } else {
                runs.push(TextRun {
                    text: "\n".to_string(),
                    font: FontSpec::default(),
                });
            }
        } else if !para_had_runs {
            runs.push(TextRun {
                text: String::new(),
                font: FontSpec::default(),
            });
        }
    }
    if runs.is_empty() {
        runs.push(TextRun {
            text: String::new(),
            font: FontSpec::default(),
        });
    }

    let shape_id = find_child(shape, NS_P, "nvSpPr")
        .and_then(|nv| find_child(&nv, NS_P, "cNvPr"))
        .and_then(|c| c.attribute("id").and_then(|v| v.parse().ok()))
        .unwrap_or(0);

    Some(TextElement {
        id: ElementId::text(id_prefix, n),
        runs,
        bounds: parse_bounds(shape),
        is_title,
        raw: None,
        shape_id,
    })
}

fn parse_pic_shape(
    shape: &Node,
    id_prefix: &str,
    n: u32,
    rels: &HashMap<&str, &Relationship>,
    parts: &BTreeMap<String, Vec<u8>>,
) -> Option<ImageElement> {
    let blip = shape
        .descendants()
        .find(|d| d.is_element() && d.tag_name() == (NS_A, "blip").into())?;
    let rel_id = blip.attribute((NS_R, "embed"))?;
    let rel = rels.get(rel_id)?;
    if rel.rtype != REL_TYPE_IMAGE {
        return None;
    }
    let media_path = resolve_target("ppt/slides", &rel.target);
    let content_type =
        content_type_for_media(&media_path, parts.get(&media_path).map(|v| v.as_slice()))?;

    let shape_id = find_child(shape, NS_P, "nvPicPr")
        .and_then(|nv| find_child(&nv, NS_P, "cNvPr"))
        .and_then(|c| c.attribute("id").and_then(|v| v.parse().ok()))
        .unwrap_or(0);

    Some(ImageElement {
        id: ElementId::image(id_prefix, n),
        media_path,
        bounds: parse_bounds(shape),
        content_type,
        rel_id: rel_id.to_string(),
        raw: None,
        shape_id,
    })
}
