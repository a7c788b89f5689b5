/* tslint:disable */
/* eslint-disable */

/**
 * One consultancy session against a generated case base.
 */
export class DemoSession {
    free(): void;
    [Symbol.dispose](): void;
    constructor(cases: number, seed: number);
    /**
     * Demographics of every generated case, usable as starting profiles.
     */
    profiles(): string;
    /**
     * Current recommendations and hybrid state as JSON.
     */
    recommend(limit: number): string;
    /**
     * Adds an element to the query; false if it was already selected.
     */
    select(name: string): boolean;
    /**
     * Restarts the session from the demographics of case `index`.
     */
    start(index: number): void;
}

/**
 * α for every verbosity in `0..=max_verbosity`.
 */
export function alpha_curve(beta: number, verbosity_threshold: number, max_verbosity: number): Float64Array;

/**
 * Leave-one-out MAP of cbr:2, graph and hybrid:0.3 on a generated case base.
 */
export function evaluate(cases: number, seed: number, levels: Uint32Array): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_demosession_free: (a: number, b: number) => void;
    readonly alpha_curve: (a: number, b: number, c: number) => [number, number];
    readonly demosession_new: (a: number, b: number) => [number, number, number];
    readonly demosession_profiles: (a: number) => [number, number];
    readonly demosession_recommend: (a: number, b: number) => [number, number, number, number];
    readonly demosession_select: (a: number, b: number, c: number) => [number, number, number];
    readonly demosession_start: (a: number, b: number) => [number, number];
    readonly evaluate: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __externref_table_dealloc: (a: number) => void;
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
