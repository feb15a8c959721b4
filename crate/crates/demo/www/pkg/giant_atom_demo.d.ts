/* tslint:disable */
/* eslint-disable */

/**
 * Populations from the delay equation, the lattice and `exp(-Gamma t)`.
 */
export function decay_curves(d: number, phi_c: number, g: number, t_max: number): string;

/**
 * Backward and forward field magnitudes at both coupling points.
 */
export function field_components(d: number, phi_c: number, t_max: number): string;

/**
 * Canonical phase vector that makes an L-leg atom decay exponentially.
 */
export function markov_phases(legs: number): string;

/**
 * Parses `pi/2`-style phase text for the page's inputs.
 */
export function parse_phase(text: string): number;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly decay_curves: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly field_components: (a: number, b: number, c: number) => [number, number, number, number];
    readonly markov_phases: (a: number) => [number, number, number, number];
    readonly parse_phase: (a: number, b: number) => [number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
