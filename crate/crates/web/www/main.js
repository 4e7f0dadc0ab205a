// Glue generated by `wasm-bindgen --target web --out-dir www/pkg`.
import init, { eval_term, classify_unit, split_demo } from "./pkg/cylset_web.js";

const $ = (id) => document.getElementById(id);
const show = (text) => {
  $("out").textContent = JSON.stringify(JSON.parse(text), null, 2);
};

await init();
$("out").textContent = "Ready.";

$("do-eval").onclick = () => show(eval_term($("unit").value, $("term").value, $("eval").value));
$("do-classify").onclick = () => show(classify_unit($("unit").value));
$("do-split-d").onclick = () => show(split_demo($("unit").value, $("term").value, $("eval").value, "d"));
$("do-split-crs").onclick = () => show(split_demo($("unit").value, $("term").value, $("eval").value, "crs"));
