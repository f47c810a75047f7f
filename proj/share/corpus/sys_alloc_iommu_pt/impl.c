int sys_alloc_iommu_pt(pn_t frm, size_t index, pn_t to, size_t perm) {
    struct page *page;
    struct page *target;

    if (!is_pn_valid(frm))
        return -EINVAL;
    if (!is_pn_valid(to))
        return -EINVAL;
    if (index >= PAGE_WORDS)
        return -EINVAL;
    page = get_page(frm);
    if (page->type != PAGE_TYPE_IOMMU_PT)
        return -EINVAL;
    if (page->owner != current)
        return -EACCES;
    target = get_page(to);
    if (target->type != PAGE_TYPE_FRAME)
        return -EINVAL;

    target->refcnt = target->refcnt + 1;
    page->data[index] = (pages_ptr_to_int + to * PAGE_SIZE) | perm;
    return 0;
}
