/* tslint:disable */
/* eslint-disable */

/**
 * Returns `{"classes": [...], "size": n, "base": [...]}`.
 */
export function classify_unit(unit_json: string): string;

/**
 * Evaluates `term` in the unit; returns `{"term", "sequences"}`.
 */
export function eval_term(unit_json: string, term: string, eval_json: string): string;

/**
 * Splits `term` at the first point satisfying it: below `c0 -d01` with the
 * diagonal construction when `class` is `"d"`, otherwise by relabelling.
 */
export function split_demo(unit_json: string, term: string, eval_json: string, _class: string): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly classify_unit: (a: number, b: number) => [number, number];
    readonly eval_term: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number];
    readonly split_demo: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
