//! XML generation for regenerated shapes, fresh slides, and the package
//! parts that have to be rewritten when the slide set changes.

use std::collections::HashMap;
use std::fmt::Write;

use crate::model::{
    BoundingBox, Chunk, FontSpec, ImageElement, Relationship, Slide, TextElement,
};

pub(crate) fn escape_text(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            _ => out.push(c),
        }
    }
    out
}

pub(crate) fn escape_attr(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

fn xfrm_xml(b: &BoundingBox) -> String {
    format!(
        "<a:xfrm><a:off x=\"{}\" y=\"{}\"/><a:ext cx=\"{}\" cy=\"{}\"/></a:xfrm>",
        b.x, b.y, b.w, b.h
    )
}

fn rpr_xml(font: &FontSpec) -> String {
    let mut attrs = String::new();
    if let Some(sz) = font.size_pt {
        let _ = write!(attrs, " sz=\"{}\"", (sz * 100.0).round() as i64);
    }
    if let Some(b) = font.bold {
        let _ = write!(attrs, " b=\"{}\"", if b { "1" } else { "0" });
    }
    if let Some(i) = font.italic {
        let _ = write!(attrs, " i=\"{}\"", if i { "1" } else { "0" });
    }
    let mut children = String::new();
    if let Some(color) = &font.color_rgb {
        let _ = write!(
            children,
            "<a:solidFill><a:srgbClr val=\"{}\"/></a:solidFill>",
            escape_attr(color)
        );
    }
    if let Some(name) = &font.name {
        let _ = write!(children, "<a:latin typeface=\"{}\"/>", escape_attr(name));
    }
    if children.is_empty() {
        format!("<a:rPr{attrs}/>")
    } else {
        format!("<a:rPr{attrs}>{children}</a:rPr>")
    }
}

/// Serialize a text element: one `a:p` per line, one run per line segment.
/// This is the canonical form `runs_from_text` round-trips with.
pub(crate) fn text_shape_xml(element: &TextElement) -> Vec<u8> {
    let mut paragraphs: Vec<Vec<(&str, &FontSpec)>> = vec![Vec::new()];
    for run in &element.runs {
        let mut segments = run.text.split('\n').peekable();
        while let Some(seg) = segments.next() {
            if !seg.is_empty() {
                paragraphs.last_mut().unwrap().push((seg, &run.font));
            }
            if segments.peek().is_some() {
                paragraphs.push(Vec::new());
            }
        }
    }

    let mut body = String::new();
    for para in &paragraphs {
        if para.is_empty() {
            body.push_str("<a:p/>");
            continue;
        }
        body.push_str("<a:p>");
        for (text, font) in para {
            let _ = write!(
                body,
                "<a:r>{}<a:t>{}</a:t></a:r>",
                rpr_xml(font),
                escape_text(text)
            );
        }
        body.push_str("</a:p>");
    }
    // A shape whose text is a single empty run still needs one paragraph.
    if paragraphs.len() == 1 && paragraphs[0].is_empty() {
        body = "<a:p/>".to_string();
    }

    format!(
        "<p:sp><p:nvSpPr><p:cNvPr id=\"{id}\" name=\"TextBox {id}\"/><p:cNvSpPr txBox=\"1\"/><p:nvPr/></p:nvSpPr>\
<p:spPr>{xfrm}<a:prstGeom prst=\"rect\"><a:avLst/></a:prstGeom></p:spPr>\
<p:txBody><a:bodyPr/><a:lstStyle/>{body}</p:txBody></p:sp>",
        id = element.shape_id,
        xfrm = xfrm_xml(&element.bounds),
        body = body
    )
    .into_bytes()
}

pub(crate) fn pic_shape_xml(element: &ImageElement) -> Vec<u8> {
    format!(
        "<p:pic><p:nvPicPr><p:cNvPr id=\"{id}\" name=\"Picture {id}\"/><p:cNvPicPr/><p:nvPr/></p:nvPicPr>\
<p:blipFill><a:blip r:embed=\"{rel}\"/><a:stretch><a:fillRect/></a:stretch></p:blipFill>\
<p:spPr>{xfrm}<a:prstGeom prst=\"rect\"><a:avLst/></a:prstGeom></p:spPr></p:pic>",
        id = element.shape_id,
        rel = escape_attr(&element.rel_id),
        xfrm = xfrm_xml(&element.bounds)
    )
    .into_bytes()
}

pub(crate) const SLIDE_HEAD: &str = "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"yes\"?>\r\n\
<p:sld xmlns:a=\"http://schemas.openxmlformats.org/drawingml/2006/main\" \
xmlns:r=\"http://schemas.openxmlformats.org/officeDocument/2006/relationships\" \
xmlns:p=\"http://schemas.openxmlformats.org/presentationml/2006/main\">\
<p:cSld><p:spTree>\
<p:nvGrpSpPr><p:cNvPr id=\"1\" name=\"\"/><p:cNvGrpSpPr/><p:nvPr/></p:nvGrpSpPr>\
<p:grpSpPr><a:xfrm><a:off x=\"0\" y=\"0\"/><a:ext cx=\"0\" cy=\"0\"/>\
<a:chOff x=\"0\" y=\"0\"/><a:chExt cx=\"0\" cy=\"0\"/></a:xfrm></p:grpSpPr>";

pub(crate) const SLIDE_TAIL: &str =
    "</p:spTree></p:cSld><p:clrMapOvr><a:masterClrMapping/></p:clrMapOvr></p:sld>";

/// A slide with no modeled elements, ready for ADD mappings.
pub(crate) fn empty_slide(layout_ref: Option<String>, id_prefix: &str) -> Slide {
    let mut rels = Vec::new();
    if let Some(layout) = &layout_ref {
        rels.push(Relationship {
            id: "rId1".to_string(),
            rtype: crate::parse::REL_TYPE_LAYOUT.to_string(),
            target: match layout.strip_prefix("ppt/") {
                Some(rest) => format!("../{rest}"),
                None => layout.clone(),
            },
        });
    }
    let next_rel_n = rels.len() as u32 + 1;
    Slide {
        index: 0,
        part_path: None,
        chunks: vec![
            Chunk::Static(SLIDE_HEAD.as_bytes().to_vec()),
            Chunk::Static(SLIDE_TAIL.as_bytes().to_vec()),
        ],
        elements: HashMap::new(),
        rels,
        rels_raw: None,
        rels_dirty: true,
        layout_ref,
        id_prefix: id_prefix.to_string(),
        next_key: 0,
        next_text_n: 0,
        next_image_n: 0,
        next_shape_id: 2,
        next_rel_n,
    }
}

pub(crate) fn rels_xml(rels: &[Relationship]) -> Vec<u8> {
    let mut out = String::from(
        "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"yes\"?>\r\n\
<Relationships xmlns=\"http://schemas.openxmlformats.org/package/2006/relationships\">",
    );
    for rel in rels {
        let _ = write!(
            out,
            "<Relationship Id=\"{}\" Type=\"{}\" Target=\"{}\"/>",
            escape_attr(&rel.id),
            escape_attr(&rel.rtype),
            escape_attr(&rel.target)
        );
    }
    out.push_str("</Relationships>");
    out.into_bytes()
}

pub(crate) fn content_types_xml(
    defaults: &[(String, String)],
    overrides: &[(String, String)],
) -> Vec<u8> {
    let mut out = String::from(
        "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"yes\"?>\r\n\
<Types xmlns=\"http://schemas.openxmlformats.org/package/2006/content-types\">",
    );
    for (ext, ct) in defaults {
        let _ = write!(
            out,
            "<Default Extension=\"{}\" ContentType=\"{}\"/>",
            escape_attr(ext),
            escape_attr(ct)
        );
    }
    for (part, ct) in overrides {
        let _ = write!(
            out,
            "<Override PartName=\"{}\" ContentType=\"{}\"/>",
            escape_attr(part),
            escape_attr(ct)
        );
    }
    out.push_str("</Types>");
    out.into_bytes()
}

pub(crate) fn sld_id_lst_xml(entries: &[(u32, String)]) -> String {
    let mut out = String::from("<p:sldIdLst>");
    for (id, rel_id) in entries {
        let _ = write!(out, "<p:sldId id=\"{}\" r:id=\"{}\"/>", id, escape_attr(rel_id));
    }
    out.push_str("</p:sldIdLst>");
    out
}
