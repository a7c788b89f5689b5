/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_demosession_free: (a: number, b: number) => void;
export const alpha_curve: (a: number, b: number, c: number) => [number, number];
export const demosession_new: (a: number, b: number) => [number, number, number];
export const demosession_profiles: (a: number) => [number, number];
export const demosession_recommend: (a: number, b: number) => [number, number, number, number];
export const demosession_select: (a: number, b: number, c: number) => [number, number, number];
export const demosession_start: (a: number, b: number) => [number, number];
export const evaluate: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __wbindgen_start: () => void;
