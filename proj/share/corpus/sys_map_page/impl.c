int sys_map_page(pn_t pt, size_t index, pn_t frm, size_t perm) {
    struct page *ptpage;
    struct page *frame;

    if (!is_pn_valid(pt))
        return -EINVAL;
    if (!is_pn_valid(frm))
        return -EINVAL;
    if (index >= PAGE_WORDS)
        return -EINVAL;
    ptpage = get_page(pt);
    if (ptpage->type != PAGE_TYPE_X86_PT)
        return -EINVAL;
    if (ptpage->owner != current)
        return -EACCES;
    frame = get_page(frm);
    if (frame->type != PAGE_TYPE_FRAME)
        return -EINVAL;

    frame->refcnt = frame->refcnt + 1;
    ptpage->data[index] = (frm << PTE_ADDR_SHIFT) | perm;
    return 0;
}
