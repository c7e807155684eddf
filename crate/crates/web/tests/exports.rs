use scikg_testkit::corpus;
use scikg_web::{analyze, analyze_json, strip_json, to_xmp, xmp_json};
use serde_json::Value;

#[test]
fn analyze_reports_annotations_and_warnings() {
    let v = analyze_json(corpus::ENTITY_LINKING);
    assert_eq!(v["ok"], true);
    assert_eq!(v["annotations"][0]["value"], "antibiotic therapy");
    assert_eq!(v["annotations"][0]["link"]["uri"], "https://www.orkg.org/orkg/resource/R12259");
    assert_eq!(v["annotations"][0]["line"], 1);
    assert_eq!(v["warnings"].as_array().unwrap().len(), 4);
    assert_eq!(v["contributions"]["1"].as_array().unwrap().len(), 1);

    let v = analyze_json(corpus::BIBLIOGRAPHIC);
    assert_eq!(v["biblio"]["authors"][2], "Jens Eickhoff");
}

#[test]
fn parse_errors_carry_positions() {
    let v = analyze_json("ok\n\\method{open");
    assert_eq!(v["ok"], false);
    assert_eq!(v["line"], 2);
    let parsed: Value = serde_json::from_str(&analyze("\\method{")).unwrap();
    assert_eq!(parsed["ok"], false);
}

#[test]
fn strip_and_xmp() {
    let v = strip_json(corpus::INVISIBLE_MARKUP);
    assert!(!v["text"].as_str().unwrap().contains("0.06"));

    let v = xmp_json(corpus::CUSTOM_PROPERTIES, "");
    let packet = v["packet"].as_str().unwrap();
    assert!(packet.contains("http://purl.org/spar/amo#"));
    assert!(packet.contains("https://orkg.org/property/"));

    let v: Value = serde_json::from_str(&to_xmp(r"\method{x}", "https://example.org/p/")).unwrap();
    assert!(v["packet"].as_str().unwrap().contains("https://example.org/p/"));
    let v = xmp_json(r"\contribution{nope:x}{y}", "");
    assert_eq!(v["ok"], false);
}
