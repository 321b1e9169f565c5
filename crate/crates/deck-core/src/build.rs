//! Programmatic construction of small presentation archives.
//!
//! Produces complete, self-contained PPTX bytes (content types, package
//! rels, presentation, one master/layout/theme, slides, media) from a
//! declarative description. Used for test fixtures and demo decks; the
//! output loads through [`crate::load_deck`] like any other archive.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write as _;

use crate::error::{DeckError, Result};
use crate::model::{BoundingBox, ElementId, FontSpec, ImageElement, TextElement};
use crate::model::runs_from_text;
use crate::xmlgen;

#[derive(Debug, Clone, Default)]
pub struct DeckBuilder {
    slides: Vec<SlideSpec>,
}

#[derive(Debug, Clone, Default)]
pub struct SlideSpec {
    texts: Vec<TextBoxSpec>,
    images: Vec<ImageSpec>,
}

#[derive(Debug, Clone)]
struct TextBoxSpec {
    text: String,
    font: FontSpec,
    bounds: Option<BoundingBox>,
}

#[derive(Debug, Clone)]
struct ImageSpec {
    bytes: Vec<u8>,
    ext: &'static str,
    bounds: Option<BoundingBox>,
}

impl SlideSpec {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn text(mut self, text: &str) -> Self {
        self.texts.push(TextBoxSpec {
            text: text.to_string(),
            font: FontSpec::default(),
            bounds: None,
        });
        self
    }

    pub fn text_at(mut self, text: &str, bounds: BoundingBox) -> Self {
        self.texts.push(TextBoxSpec {
            text: text.to_string(),
            font: FontSpec::default(),
            bounds: Some(bounds),
        });
        self
    }

    pub fn styled_text(mut self, text: &str, font: FontSpec, bounds: BoundingBox) -> Self {
        self.texts.push(TextBoxSpec {
            text: text.to_string(),
            font,
            bounds: Some(bounds),
        });
        self
    }

    /// Image bytes must be PNG, JPEG, or GIF.
    pub fn image(mut self, bytes: Vec<u8>, bounds: BoundingBox) -> Self {
        let ext = match crate::parse::sniff_image_type(&bytes) {
            Some("image/png") => "png",
            Some("image/jpeg") => "jpeg",
            Some("image/gif") => "gif",
            _ => "png",
        };
        self.images.push(ImageSpec {
            bytes,
            ext,
            bounds: Some(bounds),
        });
        self
    }
}

impl DeckBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn slide(mut self, spec: SlideSpec) -> Self {
        self.slides.push(spec);
        self
    }

    /// Assemble the archive. Panics on zero slides (a presentation always
    /// has at least one).
    pub fn build(self) -> Result<Vec<u8>> {
        assert!(!self.slides.is_empty(), "a deck needs at least one slide");

        let mut parts: BTreeMap<String, Vec<u8>> = BTreeMap::new();
        let mut media_exts: Vec<&str> = Vec::new();
        let mut media_num = 1u32;

        let mut pres_rels = vec![crate::model::Relationship {
            id: "rId1".to_string(),
            rtype: "http://schemas.openxmlformats.org/officeDocument/2006/relationships/slideMaster"
                .to_string(),
            target: "slideMasters/slideMaster1.xml".to_string(),
        }];
        let mut sld_entries: Vec<(u32, String)> = Vec::new();

        for (i, spec) in self.slides.iter().enumerate() {
            let slide_num = i as u32 + 1;
            let path = format!("ppt/slides/slide{slide_num}.xml");
            let rel_id = format!("rId{}", i + 2);
            pres_rels.push(crate::model::Relationship {
                id: rel_id.clone(),
                rtype: crate::parse::REL_TYPE_SLIDE.to_string(),
                target: format!("slides/slide{slide_num}.xml"),
            });
            sld_entries.push((256 + i as u32, rel_id));

            let mut slide_rels = vec![crate::model::Relationship {
                id: "rId1".to_string(),
                rtype: crate::parse::REL_TYPE_LAYOUT.to_string(),
                target: "../slideLayouts/slideLayout1.xml".to_string(),
            }];

            let mut xml: Vec<u8> = xmlgen::SLIDE_HEAD.as_bytes().to_vec();
            let mut shape_id = 2u32;
            for (ti, tspec) in spec.texts.iter().enumerate() {
                let bounds = tspec.bounds.unwrap_or(default_text_bounds(ti));
                let element = TextElement {
                    id: ElementId::text("s", 0),
                    runs: runs_from_text(&tspec.text, &tspec.font),
                    bounds,
                    is_title: false,
                    raw: None,
                    shape_id,
                };
                shape_id += 1;
                xml.extend_from_slice(&xmlgen::text_shape_xml(&element));
            }
            for ispec in &spec.images {
                let media_path = format!("ppt/media/image{media_num}.{}", ispec.ext);
                media_num += 1;
                parts.insert(media_path.clone(), ispec.bytes.clone());
                media_exts.push(ispec.ext);
                let rel_id = format!("rId{}", slide_rels.len() + 1);
                slide_rels.push(crate::model::Relationship {
                    id: rel_id.clone(),
                    rtype: crate::parse::REL_TYPE_IMAGE.to_string(),
                    target: crate::model::rel_target_for_media(&media_path),
                });
                let bounds = ispec.bounds.unwrap_or(BoundingBox::new(
                    crate::model::EMU_PER_INCH,
                    crate::model::EMU_PER_INCH,
                    crate::model::EMU_PER_INCH * 2,
                    crate::model::EMU_PER_INCH * 2,
                ));
                let element = ImageElement {
                    id: ElementId::image("s", 0),
                    media_path,
                    bounds,
                    content_type: String::new(),
                    rel_id,
                    raw: None,
                    shape_id,
                };
                shape_id += 1;
                xml.extend_from_slice(&xmlgen::pic_shape_xml(&element));
            }
            xml.extend_from_slice(xmlgen::SLIDE_TAIL.as_bytes());

            parts.insert(path.clone(), xml);
            parts.insert(
                crate::parse::slide_rels_path(&path),
                xmlgen::rels_xml(&slide_rels),
            );
        }

        parts.insert(
            "_rels/.rels".to_string(),
            xmlgen::rels_xml(&[crate::model::Relationship {
                id: "rId1".to_string(),
                rtype:
                    "http://schemas.openxmlformats.org/officeDocument/2006/relationships/officeDocument"
                        .to_string(),
                target: "ppt/presentation.xml".to_string(),
            }]),
        );
        parts.insert("ppt/presentation.xml".to_string(), presentation_xml(&sld_entries));
        parts.insert(
            "ppt/_rels/presentation.xml.rels".to_string(),
            xmlgen::rels_xml(&pres_rels),
        );
        parts.insert(
            "ppt/slideMasters/slideMaster1.xml".to_string(),
            MASTER_XML.as_bytes().to_vec(),
        );
        parts.insert(
            "ppt/slideMasters/_rels/slideMaster1.xml.rels".to_string(),
            xmlgen::rels_xml(&[
                crate::model::Relationship {
                    id: "rId1".to_string(),
                    rtype: crate::parse::REL_TYPE_LAYOUT.to_string(),
                    target: "../slideLayouts/slideLayout1.xml".to_string(),
                },
                crate::model::Relationship {
                    id: "rId2".to_string(),
                    rtype: "http://schemas.openxmlformats.org/officeDocument/2006/relationships/theme"
                        .to_string(),
                    target: "../theme/theme1.xml".to_string(),
                },
            ]),
        );
        parts.insert(
            "ppt/slideLayouts/slideLayout1.xml".to_string(),
            LAYOUT_XML.as_bytes().to_vec(),
        );
        parts.insert(
            "ppt/slideLayouts/_rels/slideLayout1.xml.rels".to_string(),
            xmlgen::rels_xml(&[crate::model::Relationship {
                id: "rId1".to_string(),
                rtype:
                    "http://schemas.openxmlformats.org/officeDocument/2006/relationships/slideMaster"
                        .to_string(),
                target: "../slideMasters/slideMaster1.xml".to_string(),
            }]),
        );
        parts.insert("ppt/theme/theme1.xml".to_string(), THEME_XML.as_bytes().to_vec());
        parts.insert(
            crate::parse::CONTENT_TYPES_PATH.to_string(),
            content_types(&media_exts, self.slides.len()),
        );

        write_archive(&parts)
    }
}

fn default_text_bounds(index: usize) -> BoundingBox {
    let inch = crate::model::EMU_PER_INCH;
    BoundingBox::new(inch / 2, inch / 2 + index as i64 * inch, inch * 6, (inch * 3) / 4)
}

fn presentation_xml(sld_entries: &[(u32, String)]) -> Vec<u8> {
    let mut out = String::from(
        "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"yes\"?>\r\n\
<p:presentation xmlns:a=\"http://schemas.openxmlformats.org/drawingml/2006/main\" \
xmlns:r=\"http://schemas.openxmlformats.org/officeDocument/2006/relationships\" \
xmlns:p=\"http://schemas.openxmlformats.org/presentationml/2006/main\">\
<p:sldMasterIdLst><p:sldMasterId id=\"2147483648\" r:id=\"rId1\"/></p:sldMasterIdLst>",
    );
    out.push_str(&xmlgen::sld_id_lst_xml(sld_entries));
    let _ = write!(
        out,
        "<p:sldSz cx=\"9144000\" cy=\"6858000\"/><p:notesSz cx=\"6858000\" cy=\"9144000\"/></p:presentation>"
    );
    out.into_bytes()
}

fn content_types(media_exts: &[&str], _slide_count: usize) -> Vec<u8> {
    let mut defaults = vec![
        (
            "rels".to_string(),
            "application/vnd.openxmlformats-package.relationships+xml".to_string(),
        ),
        ("xml".to_string(), "application/xml".to_string()),
    ];
    let mut seen = std::collections::HashSet::new();
    for ext in media_exts {
        if seen.insert(*ext) {
            let ct = match *ext {
                "png" => "image/png",
                "jpeg" => "image/jpeg",
                "gif" => "image/gif",
                other => {
                    defaults.push((other.to_string(), "application/octet-stream".to_string()));
                    continue;
                }
            };
            defaults.push((ext.to_string(), ct.to_string()));
        }
    }
    let mut overrides = vec![
        (
            "/ppt/presentation.xml".to_string(),
            "application/vnd.openxmlformats-officedocument.presentationml.presentation.main+xml"
                .to_string(),
        ),
        (
            "/ppt/slideMasters/slideMaster1.xml".to_string(),
            "application/vnd.openxmlformats-officedocument.presentationml.slideMaster+xml"
                .to_string(),
        ),
        (
            "/ppt/slideLayouts/slideLayout1.xml".to_string(),
            "application/vnd.openxmlformats-officedocument.presentationml.slideLayout+xml"
                .to_string(),
        ),
        (
            "/ppt/theme/theme1.xml".to_string(),
            "application/vnd.openxmlformats-officedocument.theme+xml".to_string(),
        ),
    ];
    for i in 0.._slide_count {
        overrides.push((
            format!("/ppt/slides/slide{}.xml", i + 1),
            "application/vnd.openxmlformats-officedocument.presentationml.slide+xml".to_string(),
        ));
    }
    xmlgen::content_types_xml(&defaults, &overrides)
}

fn write_archive(parts: &BTreeMap<String, Vec<u8>>) -> Result<Vec<u8>> {
    let mut cursor = std::io::Cursor::new(Vec::new());
    let mut writer = zip::ZipWriter::new(&mut cursor);
    let options = zip::write::SimpleFileOptions::default()
        .compression_method(zip::CompressionMethod::Deflated)
        .last_modified_time(zip::DateTime::default());
    for (name, bytes) in parts {
        writer
            .start_file(name, options)
            .map_err(|e| DeckError::SerializationError(e.to_string()))?;
        writer
            .write_all(bytes)
            .map_err(|e| DeckError::SerializationError(e.to_string()))?;
    }
    writer
        .finish()
        .map_err(|e| DeckError::SerializationError(e.to_string()))?;
    Ok(cursor.into_inner())
}

const MASTER_XML: &str = "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"yes\"?>\r\n\
<p:sldMaster xmlns:a=\"http://schemas.openxmlformats.org/drawingml/2006/main\" \
xmlns:r=\"http://schemas.openxmlformats.org/officeDocument/2006/relationships\" \
xmlns:p=\"http://schemas.openxmlformats.org/presentationml/2006/main\">\
<p:cSld><p:spTree><p:nvGrpSpPr><p:cNvPr id=\"1\" name=\"\"/><p:cNvGrpSpPr/><p:nvPr/></p:nvGrpSpPr>\
<p:grpSpPr/></p:spTree></p:cSld>\
<p:clrMap bg1=\"lt1\" tx1=\"dk1\" bg2=\"lt2\" tx2=\"dk2\" accent1=\"accent1\" accent2=\"accent2\" \
accent3=\"accent3\" accent4=\"accent4\" accent5=\"accent5\" accent6=\"accent6\" hlink=\"hlink\" \
folHlink=\"folHlink\"/>\
<p:sldLayoutIdLst><p:sldLayoutId id=\"2147483649\" r:id=\"rId1\"/></p:sldLayoutIdLst></p:sldMaster>";

const LAYOUT_XML: &str = "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"yes\"?>\r\n\
<p:sldLayout xmlns:a=\"http://schemas.openxmlformats.org/drawingml/2006/main\" \
xmlns:r=\"http://schemas.openxmlformats.org/officeDocument/2006/relationships\" \
xmlns:p=\"http://schemas.openxmlformats.org/presentationml/2006/main\" type=\"blank\">\
<p:cSld><p:spTree><p:nvGrpSpPr><p:cNvPr id=\"1\" name=\"\"/><p:cNvGrpSpPr/><p:nvPr/></p:nvGrpSpPr>\
<p:grpSpPr/></p:spTree></p:cSld>\
<p:clrMapOvr><a:masterClrMapping/></p:clrMapOvr></p:sldLayout>";

const THEME_XML: &str = "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"yes\"?>\r\n\
<a:theme xmlns:a=\"http://schemas.openxmlformats.org/drawingml/2006/main\" name=\"Plain\">\
<a:themeElements>\
<a:clrScheme name=\"Plain\"><a:dk1><a:srgbClr val=\"000000\"/></a:dk1>\
<a:lt1><a:srgbClr val=\"FFFFFF\"/></a:lt1><a:dk2><a:srgbClr val=\"44546A\"/></a:dk2>\
<a:lt2><a:srgbClr val=\"E7E6E6\"/></a:lt2><a:accent1><a:srgbClr val=\"4472C4\"/></a:accent1>\
<a:accent2><a:srgbClr val=\"ED7D31\"/></a:accent2><a:accent3><a:srgbClr val=\"A5A5A5\"/></a:accent3>\
<a:accent4><a:srgbClr val=\"FFC000\"/></a:accent4><a:accent5><a:srgbClr val=\"5B9BD5\"/></a:accent5>\
<a:accent6><a:srgbClr val=\"70AD47\"/></a:accent6><a:hlink><a:srgbClr val=\"0563C1\"/></a:hlink>\
<a:folHlink><a:srgbClr val=\"954F72\"/></a:folHlink></a:clrScheme>\
<a:fontScheme name=\"Plain\"><a:majorFont><a:latin typeface=\"Calibri Light\"/>\
<a:ea typeface=\"\"/><a:cs typeface=\"\"/></a:majorFont>\
<a:minorFont><a:latin typeface=\"Calibri\"/><a:ea typeface=\"\"/><a:cs typeface=\"\"/></a:minorFont>\
</a:fontScheme>\
<a:fmtScheme name=\"Plain\">\
<a:fillStyleLst><a:solidFill><a:schemeClr val=\"phClr\"/></a:solidFill>\
<a:solidFill><a:schemeClr val=\"phClr\"/></a:solidFill>\
<a:solidFill><a:schemeClr val=\"phClr\"/></a:solidFill></a:fillStyleLst>\
<a:lnStyleLst><a:ln><a:solidFill><a:schemeClr val=\"phClr\"/></a:solidFill></a:ln>\
<a:ln><a:solidFill><a:schemeClr val=\"phClr\"/></a:solidFill></a:ln>\
<a:ln><a:solidFill><a:schemeClr val=\"phClr\"/></a:solidFill></a:ln></a:lnStyleLst>\
<a:effectStyleLst><a:effectStyle><a:effectLst/></a:effectStyle>\
<a:effectStyle><a:effectLst/></a:effectStyle>\
<a:effectStyle><a:effectLst/></a:effectStyle></a:effectStyleLst>\
<a:bgFillStyleLst><a:solidFill><a:schemeClr val=\"phClr\"/></a:solidFill>\
<a:solidFill><a:schemeClr val=\"phClr\"/></a:solidFill>\
<a:solidFill><a:schemeClr val=\"phClr\"/></a:solidFill></a:bgFillStyleLst>\
</a:fmtScheme></a:themeElements></a:theme>";

/// 1x1 red PNG, handy wherever a valid image asset is needed.
pub fn tiny_png() -> Vec<u8> {
    const BYTES: [u8; 69] = [
        0x89, 0x50, 0x4E, 0x47, 0x0D, 0x0A, 0x1A, 0x0A, 0x00, 0x00, 0x00, 0x0D, 0x49, 0x48, 0x44,
        0x52, 0x00, 0x00, 0x00, 0x01, 0x00, 0x00, 0x00, 0x01, 0x08, 0x02, 0x00, 0x00, 0x00, 0x90,
        0x77, 0x53, 0xDE, 0x00, 0x00, 0x00, 0x0C, 0x49, 0x44, 0x41, 0x54, 0x78, 0x9C, 0x63, 0x38,
        0x21, 0x27, 0x07, 0x00, 0x02, 0xB6, 0x01, 0x05, 0x34, 0xA6, 0x75, 0xAA, 0x00, 0x00, 0x00,
        0x00, 0x49, 0x45, 0x4E, 0x44, 0xAE, 0x42, 0x60, 0x82,
    ];
    BYTES.to_vec()
}

/// 1x1 GIF.
pub fn tiny_gif() -> Vec<u8> {
    const BYTES: [u8; 43] = [
        0x47, 0x49, 0x46, 0x38, 0x37, 0x61, 0x01, 0x00, 0x01, 0x00, 0x81, 0x00, 0x00, 0x28, 0x78,
        0x28, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x2C, 0x00, 0x00, 0x00, 0x00,
        0x01, 0x00, 0x01, 0x00, 0x00, 0x08, 0x04, 0x00, 0x01, 0x04, 0x04, 0x00, 0x3B,
    ];
    BYTES.to_vec()
}
